package org.example.library;


/**
 * Raised when a library rule is violated.
 *
 * <p>Part of the sample lending library.
 * Instances are not thread safe.
 * @since 1.0
 * @see LoanService
 * @see Catalog
 * @see MemberDirectory
 */
public class LibraryException extends RuntimeException {
    private static final long serialVersionUID = 1L;

    /**
     * Creates a library exception.
     */
    public LibraryException(String message) {
        super(message);
    }

    /**
     * Creates a library exception.
     */
    public LibraryException(String message, Throwable cause) {
        super(message, cause);
    }
}
