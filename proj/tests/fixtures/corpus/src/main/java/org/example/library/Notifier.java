package org.example.library;

/**
 * Outgoing messages to members, for example e-mail.
 *
 * <p>Part of the sample lending library.
 * Instances are not thread safe.
 * @since 1.0
 * @see LoanService
 * @see Catalog
 * @see MemberDirectory
 */
public interface Notifier {
    /**
     * Send.
     */
    void send(Member member, String subject, String body);
}
