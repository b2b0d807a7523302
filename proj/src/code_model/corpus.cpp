#include "cogtrace/code_model/corpus.hpp"

#include <algorithm>

#include "cogtrace/common/error.hpp"
#include "cogtrace/common/text.hpp"

namespace fs = std::filesystem;

namespace cogtrace::code {

bool is_valid_utf8(std::string_view s) {
    std::size_t i = 0;
    while (i < s.size()) {
        const unsigned char c = s[i];
        std::size_t extra = 0;
        if (c < 0x80) extra = 0;
        else if ((c & 0xE0) == 0xC0 && c >= 0xC2) extra = 1;
        else if ((c & 0xF0) == 0xE0) extra = 2;
        else if ((c & 0xF8) == 0xF0 && c <= 0xF4) extra = 3;
        else return false;
        if (i + extra >= s.size()) return false;
        for (std::size_t k = 1; k <= extra; ++k)
            if ((static_cast<unsigned char>(s[i + k]) & 0xC0) != 0x80) return false;
        i += extra + 1;
    }
    return true;
}

SourceCorpus SourceCorpus::load_directory(const fs::path& root, ParseOptions options) {
    if (!fs::is_directory(root)) throw ConfigError("corpus directory not found: " + root.string());
    std::vector<std::string> paths;
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".java") continue;
        paths.push_back(fs::relative(entry.path(), root).generic_string());
    }
    std::sort(paths.begin(), paths.end());
    SourceCorpus corpus(options);
    for (const auto& p : paths) corpus.add_file(p, text::read_file((root / p).string()));
    return corpus;
}

void SourceCorpus::add_file(std::string path, std::string text) {
    if (find(path)) throw ConfigError("duplicate corpus path " + path);
    if (!is_valid_utf8(text)) throw ConfigError("corpus file is not UTF-8: " + path);
    SourceFile f;
    f.line_widths = line_widths(text, options_.tab_width);
    f.spans = parse_source(path, text, options_);
    f.path = std::move(path);
    f.text = std::move(text);
    const auto file_index = files_.size();
    for (std::size_t k = 0; k < f.spans.size(); ++k)
        symbol_index_.emplace(f.spans[k].symbol_id, std::make_pair(file_index, k));
    files_.push_back(std::move(f));
}

const SourceFile* SourceCorpus::find(std::string_view path) const {
    for (const auto& f : files_)
        if (f.path == path) return &f;
    return nullptr;
}

std::size_t SourceCorpus::total_lines() const {
    std::size_t n = 0;
    for (const auto& f : files_) n += f.line_widths.size();
    return n;
}

std::optional<SymbolSpan> SourceCorpus::locate(std::string_view file, int line, int column,
                                               SymbolKind kind) const {
    const auto* f = find(file);
    if (!f) throw Error("unknown corpus file " + std::string(file));
    if (line < 0 || line >= f->line_count() || column < 0) return std::nullopt;
    const Position p{line, column};
    const SymbolSpan* best = nullptr;
    auto extent = [](const SymbolSpan& s) {
        return std::make_pair(s.end.line - s.start.line, s.end.column - s.start.column);
    };
    for (const auto& s : f->spans) {
        if (s.start.line > line) break;  // spans are sorted by start
        if (s.kind != kind) continue;
        const bool inside = kind == SymbolKind::Line ? s.start.line == line : s.contains(p);
        if (!inside) continue;
        if (!best || extent(s) < extent(*best) || (extent(s) == extent(*best) && best->start <= s.start))
            best = &s;
    }
    if (!best) return std::nullopt;
    return *best;
}

const SymbolSpan* SourceCorpus::find_symbol(std::string_view symbol_id) const {
    auto it = symbol_index_.find(symbol_id);
    if (it == symbol_index_.end()) return nullptr;
    return &files_[it->second.first].spans[it->second.second];
}

}  // namespace cogtrace::code
