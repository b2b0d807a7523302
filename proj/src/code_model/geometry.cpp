#include "cogtrace/code_model/geometry.hpp"

#include <cmath>

#include "cogtrace/common/error.hpp"

namespace cogtrace::code {

void EditorGeometry::validate() const {
    if (!(cell_width > 0.0) || !(cell_height > 0.0) || !std::isfinite(cell_width) ||
        !std::isfinite(cell_height))
        throw ConfigError("editor geometry: cell dimensions must be positive");
    if (first_visible_line < 0) throw ConfigError("editor geometry: first visible line must be >= 0");
    if (horizontal_scroll < 0) throw ConfigError("editor geometry: horizontal scroll must be >= 0");
    if (!(viewport_width > 0.0) || !(viewport_height > 0.0))
        throw ConfigError("editor geometry: viewport must be non-empty");
    if (!std::isfinite(origin_x) || !std::isfinite(origin_y))
        throw ConfigError("editor geometry: origin must be finite");
}

std::optional<Cell> cell_from_point(const EditorGeometry& g, double x, double y) {
    if (!std::isfinite(x) || !std::isfinite(y)) return std::nullopt;
    const double dx = x - g.origin_x;
    const double dy = y - g.origin_y;
    if (dx < 0.0 || dy < 0.0 || dx >= g.viewport_width || dy >= g.viewport_height) return std::nullopt;
    return Cell{g.first_visible_line + static_cast<int>(std::floor(dy / g.cell_height)),
                g.horizontal_scroll + static_cast<int>(std::floor(dx / g.cell_width))};
}

PixelRect cell_rect(const EditorGeometry& g, Cell cell) {
    return {g.origin_x + (cell.column - g.horizontal_scroll) * g.cell_width,
            g.origin_y + (cell.line - g.first_visible_line) * g.cell_height, g.cell_width,
            g.cell_height};
}

}  // namespace cogtrace::code
