#include <algorithm>

#include "cogtrace/common/text.hpp"
#include "cogtrace/highlight/heatmap.hpp"

namespace cogtrace::highlight {

namespace {

struct Colored {
    const code::SymbolSpan* span;
    const HighlightEntry* entry;
};

void escape_into(std::string& out, std::string_view s) {
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
}

std::string open_tag(const Colored& c) {
    std::string s = "<span class=\"hl\" data-symbol=\"";
    escape_into(s, c.span->symbol_id);
    s += "\" data-score=\"" + text::format_double(c.entry->score) + "\" style=\"background-color:" +
         c.entry->color.hex() + "\">";
    return s;
}

bool covers(const code::SymbolSpan& s, int line, int col) {
    return (line > s.start.line || col >= s.start.column) && (line < s.end.line || col < s.end.column);
}

// Innermost colored span at (line, col), or nullptr.
const Colored* innermost(const std::vector<Colored>& active, int line, int col) {
    const Colored* best = nullptr;
    for (const auto& c : active) {
        if (!covers(*c.span, line, col)) continue;
        if (best == nullptr || best->span->start < c.span->start ||
            (best->span->start == c.span->start && c.span->end < best->span->end))
            best = &c;
    }
    return best;
}

std::size_t utf8_length(unsigned char lead) {
    if (lead < 0x80) return 1;
    if ((lead >> 5) == 0x6) return 2;
    if ((lead >> 4) == 0xe) return 3;
    return 4;
}

void render_file(std::string& out, const code::SourceFile& file, const std::vector<Colored>& colored, int tab_width) {
    out += "<section class=\"file\" data-file=\"";
    escape_into(out, file.path);
    out += "\">\n<h2>";
    escape_into(out, file.path);
    out += "</h2>\n<pre>";
    const auto lines = text::split(file.text, '\n');
    for (int l = 0; l < file.line_count(); ++l) {
        std::string_view line = l < static_cast<int>(lines.size()) ? std::string_view(lines[l]) : std::string_view();
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        std::vector<Colored> active;
        for (const auto& c : colored)
            if (c.span->start.line <= l && l <= c.span->end.line) active.push_back(c);

        std::string num = std::to_string(l + 1);
        out += "<span class=\"no\">" + std::string(num.size() < 5 ? 5 - num.size() : 0, ' ') + num + "</span> ";
        for (const auto& c : active)
            if (c.span->start == c.span->end && c.span->start.line == l) out += open_tag(c) + "</span>";

        const Colored* current = nullptr;
        int col = 0;
        std::size_t i = 0;
        while (i < line.size()) {
            const auto len = std::min(utf8_length(static_cast<unsigned char>(line[i])), line.size() - i);
            const Colored* here = innermost(active, l, col);
            if (here != current) {
                if (current != nullptr) out += "</span>";
                if (here != nullptr) out += open_tag(*here);
                current = here;
            }
            if (line[i] == '\t') {
                const int next = (col / tab_width + 1) * tab_width;
                out.append(static_cast<std::size_t>(next - col), ' ');
                col = next;
            } else {
                escape_into(out, line.substr(i, len));
                ++col;
            }
            i += len;
        }
        if (current != nullptr) out += "</span>";
        out += '\n';
    }
    out += "</pre>\n</section>\n";
}

}  // namespace

HeatmapExport render_heatmap(const HighlightMap& map, const code::SourceCorpus& corpus, code::SymbolKind granularity) {
    HeatmapExport ex;
    std::vector<Colored> valid;
    for (const auto& [id, entry] : map.entries) {
        const auto* span = corpus.find_symbol(id);
        if (span == nullptr) {
            ex.diagnostics.push_back("unknown symbol id " + id);
            continue;
        }
        if (span->kind != granularity) {
            ex.diagnostics.push_back("symbol " + id + " is a " + std::string(code::to_string(span->kind)) +
                                     " span; heatmap granularity is " + std::string(code::to_string(granularity)));
            continue;
        }
        valid.push_back({span, &entry});
    }
    std::sort(valid.begin(), valid.end(), [](const Colored& a, const Colored& b) {
        if (a.span->file != b.span->file) return a.span->file < b.span->file;
        if (a.span->start != b.span->start) return a.span->start < b.span->start;
        if (a.span->end != b.span->end) return a.span->end < b.span->end;
        return a.span->symbol_id < b.span->symbol_id;
    });

    ex.overlay_csv = std::string(kOverlayHeader) + "\n";
    for (const auto& c : valid) {
        const auto& s = *c.span;
        ex.overlay_csv += text::csv_field(s.file) + "," + std::to_string(s.start.line) + "," +
                          std::to_string(s.start.column) + "," + std::to_string(s.end.line) + "," +
                          std::to_string(s.end.column) + "," + text::format_double(c.entry->score) + "," +
                          c.entry->color.hex() + "\n";
    }

    std::string& h = ex.html;
    h = "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n<title>cogtrace heatmap</title>\n"
        "<style>\n"
        "body{font-family:sans-serif;margin:1.5em}\n"
        "pre{font-family:monospace;line-height:1.3;background:#fff;border:1px solid #ddd;padding:0.5em;overflow-x:auto}\n"
        ".no{color:#999;user-select:none}\n"
        ".hl:empty{display:inline-block;width:1ch;height:1em}\n"
        "</style>\n</head>\n<body>\n<h1>Heatmap</h1>\n";
    for (const auto& file : corpus.files()) {
        std::vector<Colored> colored;
        for (const auto& c : valid)
            if (c.span->file == file.path && c.entry->color.a > 0) colored.push_back(c);
        render_file(h, file, colored, corpus.options().tab_width);
    }
    h += "<section id=\"diagnostics\">\n<h2>Diagnostics</h2>\n<ul>\n";
    std::vector<std::string> all = ex.diagnostics;
    all.insert(all.end(), map.warnings.begin(), map.warnings.end());
    if (all.empty()) h += "<li>none</li>\n";
    for (const auto& d : all) {
        h += "<li>";
        escape_into(h, d);
        h += "</li>\n";
    }
    h += "</ul>\n</section>\n</body>\n</html>\n";
    return ex;
}

}  // namespace cogtrace::highlight
