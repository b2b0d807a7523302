package org.example.library;

import java.util.List;
import java.util.Optional;

/**
 * Lookup of the books the library owns.
 *
 * <p>Part of the sample lending library.
 * Instances are not thread safe.
 * @since 1.0
 * @see LoanService
 * @see Catalog
 * @see MemberDirectory
 */
public interface Catalog {
    /**
     * Add.
     */
    void add(Book book);

    /**
     * Find by isbn.
     */
    Optional<Book> findByIsbn(String isbn);

    /**
     * Search.
     */
    List<Book> search(String query);

    /**
     * By genre.
     */
    List<Book> byGenre(Genre genre);

    /**
     * Size.
     */
    int size();
}
