#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cogtrace/code_model/symbols.hpp"

namespace cogtrace::code {

struct SourceFile {
    std::string path;  // corpus-relative, '/' separated
    std::string text;
    std::vector<int> line_widths;
    std::vector<SymbolSpan> spans;

    int line_count() const noexcept { return static_cast<int>(line_widths.size()); }
};

// Immutable after construction; safe for concurrent readers.
class SourceCorpus {
public:
    SourceCorpus() = default;
    explicit SourceCorpus(ParseOptions options) : options_(options) {}

    // Every *.java file below `root`, sorted by relative path.
    static SourceCorpus load_directory(const std::filesystem::path& root, ParseOptions options = {});

    // Throws ConfigError on a duplicate path or text that is not UTF-8.
    void add_file(std::string path, std::string text);

    const std::vector<SourceFile>& files() const noexcept { return files_; }
    const SourceFile* find(std::string_view path) const;
    std::size_t total_lines() const;
    const ParseOptions& options() const noexcept { return options_; }

    // Smallest span of `kind` containing the position (Line spans cover the
    // whole row, past end of text included). Ties go to the latest start.
    // Throws Error for an unknown file; nullopt past the last line.
    std::optional<SymbolSpan> locate(std::string_view file, int line, int column, SymbolKind kind) const;

    const SymbolSpan* find_symbol(std::string_view symbol_id) const;

private:
    ParseOptions options_;
    std::vector<SourceFile> files_;
    std::map<std::string, std::pair<std::size_t, std::size_t>, std::less<>> symbol_index_;
};

bool is_valid_utf8(std::string_view s);

}  // namespace cogtrace::code
