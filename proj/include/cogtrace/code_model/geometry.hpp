#pragma once

#include <optional>

namespace cogtrace::code {

// Monospace editor text area. Pixel coordinates are screen pixels.
struct EditorGeometry {
    double origin_x = 0.0;  // top-left of the first visible cell
    double origin_y = 0.0;
    double cell_width = 8.0;
    double cell_height = 16.0;
    int first_visible_line = 0;
    int horizontal_scroll = 0;  // columns scrolled out on the left
    double viewport_width = 800.0;
    double viewport_height = 600.0;

    // Throws ConfigError.
    void validate() const;
    bool operator==(const EditorGeometry&) const = default;
};

struct Cell {
    int line = 0;
    int column = 0;
    bool operator==(const Cell&) const = default;
};

struct PixelRect {
    double x = 0.0;
    double y = 0.0;
    double width = 0.0;
    double height = 0.0;
};

// nullopt when the point lies outside the viewport.
std::optional<Cell> cell_from_point(const EditorGeometry& g, double x, double y);

// Screen rectangle of a cell (may lie outside the viewport).
PixelRect cell_rect(const EditorGeometry& g, Cell cell);

}  // namespace cogtrace::code
