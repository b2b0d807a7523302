#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "cogtrace/common/error.hpp"
#include "cogtrace/highlight/heatmap.hpp"

namespace cogtrace::highlight {

std::string Rgba::hex() const {
    static constexpr char digits[] = "0123456789abcdef";
    std::string s = "#";
    for (std::uint8_t v : {r, g, b, a}) {
        s += digits[v >> 4];
        s += digits[v & 0xf];
    }
    return s;
}

void Palette::validate() const {
    if (anchors.empty()) throw ConfigError("palette needs at least one anchor color");
}

Rgba color_for_score(double score, const Palette& palette) {
    if (!(score >= 0.0 && score <= 1.0)) throw Error("score out of range [0, 1]");
    palette.validate();
    auto channel = [](double v) { return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0))); };
    Rgba c;
    c.a = channel(score * palette.max_alpha);
    if (palette.anchors.size() == 1) {
        c.r = palette.anchors[0][0];
        c.g = palette.anchors[0][1];
        c.b = palette.anchors[0][2];
        return c;
    }
    const double pos = score * static_cast<double>(palette.anchors.size() - 1);
    const auto seg = std::min(static_cast<std::size_t>(pos), palette.anchors.size() - 2);
    const double f = pos - static_cast<double>(seg);
    const auto& lo = palette.anchors[seg];
    const auto& hi = palette.anchors[seg + 1];
    c.r = channel(lo[0] + f * (hi[0] - lo[0]));
    c.g = channel(lo[1] + f * (hi[1] - lo[1]));
    c.b = channel(lo[2] + f * (hi[2] - lo[2]));
    return c;
}

std::string symbol_file(std::string_view id) {
    std::size_t end = id.size();
    for (int k = 0; k < 3; ++k) {
        const auto p = id.rfind(':', end == 0 ? 0 : end - 1);
        if (p == std::string_view::npos) return std::string(id);
        end = p;
    }
    return std::string(id.substr(0, end));
}

namespace {

using Column = std::vector<double>;

class Evaluator {
public:
    Evaluator(const physio::MetricTable& table, const EvaluateOptions& options) : table_(table) {
        const auto n = table.rows.size();
        group_.resize(n, 0);
        if (options.normalization == Normalization::File) {
            std::map<std::string, std::size_t> ids;
            for (std::size_t i = 0; i < n; ++i)
                group_[i] = ids.emplace(symbol_file(table.rows[i].symbol_id), ids.size()).first->second;
            groups_ = ids.size();
        } else {
            groups_ = 1;
        }
    }

    Column eval(const Node& node) {
        const auto n = table_.rows.size();
        switch (node.kind) {
            case Node::Kind::Number: return Column(n, node.number);
            case Node::Kind::Variable: return variable(node.name);
            case Node::Kind::Negate: {
                auto v = eval(node.args[0]);
                for (auto& x : v) x = -x;
                return v;
            }
            case Node::Kind::Add:
            case Node::Kind::Subtract:
            case Node::Kind::Multiply:
            case Node::Kind::Divide: {
                auto a = eval(node.args[0]);
                const auto b = eval(node.args[1]);
                for (std::size_t i = 0; i < n; ++i) {
                    switch (node.kind) {
                        case Node::Kind::Add: a[i] += b[i]; break;
                        case Node::Kind::Subtract: a[i] -= b[i]; break;
                        case Node::Kind::Multiply: a[i] *= b[i]; break;
                        default:
                            if (b[i] == 0.0) throw EvaluationError("division by zero", table_.rows[i].symbol_id);
                            a[i] /= b[i];
                    }
                    check(a[i], i);
                }
                return a;
            }
            case Node::Kind::Call: return call(node);
        }
        return Column(n, 0.0);
    }

    std::vector<std::string> warnings() const { return {warnings_.begin(), warnings_.end()}; }

private:
    void check(double v, std::size_t i) const {
        if (!std::isfinite(v)) throw EvaluationError("expression is not finite", table_.rows[i].symbol_id);
    }

    Column variable(const std::string& name) {
        Column v(table_.rows.size());
        for (std::size_t i = 0; i < v.size(); ++i) {
            const auto value = physio::metric_value(table_.rows[i], name);
            if (value) {
                v[i] = *value;
            } else {
                v[i] = 0.0;
                warnings_.insert(table_.rows[i].symbol_id + ": " + name + " is missing, read as 0");
            }
        }
        return v;
    }

    Column call(const Node& node) {
        const auto n = table_.rows.size();
        if (node.name == "min" || node.name == "max") {
            auto acc = eval(node.args[0]);
            for (std::size_t k = 1; k < node.args.size(); ++k) {
                const auto b = eval(node.args[k]);
                for (std::size_t i = 0; i < n; ++i)
                    acc[i] = node.name == "min" ? std::min(acc[i], b[i]) : std::max(acc[i], b[i]);
            }
            return acc;
        }
        auto v = eval(node.args[0]);
        if (node.name == "abs") {
            for (auto& x : v) x = std::abs(x);
        } else if (node.name == "log") {
            for (std::size_t i = 0; i < n; ++i) {
                if (!(v[i] > 0.0)) throw EvaluationError("log of a non-positive value", table_.rows[i].symbol_id);
                v[i] = std::log(v[i]);
            }
        } else {
            normalize(v);
        }
        return v;
    }

    void normalize(Column& v) const {
        constexpr double inf = std::numeric_limits<double>::infinity();
        std::vector<double> lo(groups_, inf), hi(groups_, -inf);
        for (std::size_t i = 0; i < v.size(); ++i) {
            lo[group_[i]] = std::min(lo[group_[i]], v[i]);
            hi[group_[i]] = std::max(hi[group_[i]], v[i]);
        }
        for (std::size_t i = 0; i < v.size(); ++i) {
            const double l = lo[group_[i]], h = hi[group_[i]];
            v[i] = h > l ? (v[i] - l) / (h - l) : 0.5;
        }
    }

    const physio::MetricTable& table_;
    std::set<std::string> warnings_;
    std::vector<std::size_t> group_;
    std::size_t groups_ = 1;
};

}  // namespace

HighlightMap evaluate(const ScoreScript& script, const physio::MetricTable& table, const EvaluateOptions& options) {
    if (table.rows.empty()) throw ConfigError("metric table is empty");
    options.palette.validate();
    HighlightMap map;
    Evaluator ev(table, options);
    const auto scores = ev.eval(script.root);
    map.warnings = ev.warnings();
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (!std::isfinite(scores[i])) throw EvaluationError("expression is not finite", table.rows[i].symbol_id);
        const double s = std::clamp(scores[i], 0.0, 1.0);
        map.entries[table.rows[i].symbol_id] = {s, color_for_score(s, options.palette)};
    }
    return map;
}

}  // namespace cogtrace::highlight
