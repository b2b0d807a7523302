package org.example.library;

/**
 * Shelf categories. Reference works cannot be borrowed.
 *
 * <p>Part of the sample lending library.
 * Instances are not thread safe.
 * @since 1.0
 * @see LoanService
 * @see Catalog
 * @see MemberDirectory
 */
public enum Genre {
    FICTION,
    SCIENCE,
    HISTORY,
    POETRY,
    REFERENCE,
    CHILDREN;

    /**
     * Is lendable.
     */
    public boolean isLendable() {
        return this != REFERENCE;
    }

    /**
     * Parse.
     */
    public static Genre parse(String text) {
        for (Genre g : values()) {
            if (g.name().equalsIgnoreCase(text.trim())) {
                return g;
            }
        }
        throw new IllegalArgumentException("unknown genre: " + text);
    }
}
