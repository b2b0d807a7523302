package org.example.library;

import java.util.ArrayList;
import java.util.Comparator;
import java.util.LinkedHashMap;
import java.util.List;
import java.util.Locale;
import java.util.Map;
import java.util.Optional;

/**
 * Catalog backed by an insertion ordered map.
 *
 * <p>Part of the sample lending library.
 * Instances are not thread safe.
 * @since 1.0
 * @see LoanService
 * @see Catalog
 * @see MemberDirectory
 */
public class InMemoryCatalog implements Catalog {
    private final Map<String, Book> books = new LinkedHashMap<>();

    /**
     * Add.
     */
    @Override
    public void add(Book book) {
        if (books.containsKey(book.getIsbn())) {
            throw new IllegalStateException("duplicate isbn " + book.getIsbn());
        }
        books.put(book.getIsbn(), book);
    }

    /**
     * Find by isbn.
     */
    @Override
    public Optional<Book> findByIsbn(String isbn) {
        return Optional.ofNullable(books.get(isbn));
    }

    /**
     * Search.
     */
    @Override
    public List<Book> search(String query) {
        String needle = query.toLowerCase(Locale.ROOT);
        List<Book> result = new ArrayList<>();
        for (Book book : books.values()) {
            String title = book.getTitle().toLowerCase(Locale.ROOT);
            String author = book.getAuthor().toLowerCase(Locale.ROOT);
            if (title.contains(needle) || author.contains(needle)) {
                result.add(book);
            }
        }
        result.sort(Comparator.comparing(Book::getTitle));
        return result;
    }

    /**
     * By genre.
     */
    @Override
    public List<Book> byGenre(Genre genre) {
        List<Book> result = new ArrayList<>();
        for (Book book : books.values()) {
            if (book.getGenre() == genre) {
                result.add(book);
            }
        }
        return result;
    }

    /**
     * Size.
     */
    @Override
    public int size() {
        return books.size();
    }

    /**
     * Loads books from lines of the form isbn;title;author;year;genre.
     * Blank lines and lines starting with '#' are skipped.
     */
    public int importLines(Iterable<String> lines) {
        int added = 0;
        int lineNo = 0;
        for (String raw : lines) {
            lineNo++;
            String line = raw.trim();
            if (line.isEmpty() || line.startsWith("#")) {
                continue;
            }
            String[] parts = line.split(";");
            if (parts.length != 5) {
                throw new LibraryException("line " + lineNo + ": expected 5 fields");
            }
            int year;
            try {
                year = Integer.parseInt(parts[3].trim());
            } catch (NumberFormatException e) {
                throw new LibraryException("line " + lineNo + ": bad year", e);
            }
            add(new Book(parts[0].trim(), parts[1].trim(), parts[2].trim(), year, Genre.parse(parts[4])));
            added++;
        }
        return added;
    }

    /**
     * Number of books per genre, in genre order.
     */
    public Map<Genre, Integer> countByGenre() {
        Map<Genre, Integer> counts = new LinkedHashMap<>();
        for (Genre g : Genre.values()) {
            counts.put(g, 0);
        }
        for (Book book : books.values()) {
            counts.merge(book.getGenre(), 1, Integer::sum);
        }
        return counts;
    }
}
