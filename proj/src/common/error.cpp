#include "cogtrace/common/error.hpp"

namespace cogtrace {

namespace {
std::string join_lines(const std::vector<std::string>& lines) {
    std::string out;
    for (const auto& l : lines) {
        if (!out.empty()) out += "; ";
        out += l;
    }
    return out;
}
}  // namespace

ValidationError::ValidationError(std::vector<std::string> diagnostics)
    : Error(join_lines(diagnostics)), diagnostics_(std::move(diagnostics)) {}

}  // namespace cogtrace
