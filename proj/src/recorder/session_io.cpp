#include <algorithm>
#include <bit>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "cogtrace/common/error.hpp"
#include "cogtrace/common/text.hpp"
#include "cogtrace/recorder/session.hpp"

namespace fs = std::filesystem;

namespace cogtrace::rec {

namespace {

constexpr char kStreamMagic[4] = {'C', 'T', 'S', 'B'};
constexpr std::uint16_t kStreamVersion = 1;
constexpr std::size_t kStreamHeaderBytes = 4 + 2 + 2 + 4 + 8;

template <typename U>
void put(std::string& out, U v) {
    for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

template <typename U>
U get(std::string_view in, std::size_t at) {
    if (at + sizeof(U) > in.size()) throw RecorderError("truncated stream file");
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i)
        v |= static_cast<U>(static_cast<unsigned char>(in[at + i])) << (8 * i);
    return v;
}

std::string file_stem_for(const std::string& source_id) {
    std::string out;
    for (char c : source_id)
        out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.') ? c : '_';
    if (out.empty() || out == "." || out == "..") out = "_" + out;
    return out;
}

std::string encode_stream(const StreamRecord& s) {
    const auto n = s.samples.size();
    const auto channels = s.info.channel_count;
    std::string out;
    out.reserve(kStreamHeaderBytes + n * (8 + 4 * channels));
    out.append(kStreamMagic, 4);
    put<std::uint16_t>(out, kStreamVersion);
    put<std::uint16_t>(out, 0);
    put<std::uint32_t>(out, channels);
    put<std::uint64_t>(out, n);
    for (const auto& smp : s.samples) put<std::uint64_t>(out, std::bit_cast<std::uint64_t>(smp.timestamp));
    for (std::uint32_t c = 0; c < channels; ++c)
        for (const auto& smp : s.samples) put<std::uint32_t>(out, std::bit_cast<std::uint32_t>(smp.values[c]));
    return out;
}

std::vector<net::Sample> decode_stream(std::string_view in, std::uint32_t expected_channels) {
    if (in.size() < kStreamHeaderBytes || !std::equal(kStreamMagic, kStreamMagic + 4, in.begin()))
        throw RecorderError("bad stream file header");
    if (get<std::uint16_t>(in, 4) != kStreamVersion) throw RecorderError("unsupported stream file version");
    const auto channels = get<std::uint32_t>(in, 8);
    const auto n = get<std::uint64_t>(in, 12);
    if (channels != expected_channels) throw RecorderError("stream file channel count mismatch");
    if (in.size() != kStreamHeaderBytes + n * (8 + 4 * std::uint64_t{channels}))
        throw RecorderError("stream file size mismatch");
    std::vector<net::Sample> samples(n);
    std::size_t at = kStreamHeaderBytes;
    for (auto& s : samples) {
        s.timestamp = std::bit_cast<double>(get<std::uint64_t>(in, at));
        s.values.resize(channels);
        at += 8;
    }
    for (std::uint32_t c = 0; c < channels; ++c)
        for (auto& s : samples) {
            s.values[c] = std::bit_cast<float>(get<std::uint32_t>(in, at));
            at += 4;
        }
    return samples;
}

std::string quote(std::string_view s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        if (c == '\n') {
            out += "\\n";
            continue;
        }
        out += c;
    }
    return out + "\"";
}

// Values in the manifest: "string", number, or ["string", ...].
struct ManifestValue {
    std::string scalar;
    std::vector<std::string> list;
    bool is_list = false;
};

std::size_t parse_string(std::string_view s, std::size_t at, std::string& out) {
    if (at >= s.size() || s[at] != '"') throw RecorderError("manifest: expected string");
    ++at;
    while (at < s.size() && s[at] != '"') {
        if (s[at] == '\\' && at + 1 < s.size()) {
            ++at;
            out += s[at] == 'n' ? '\n' : s[at];
        } else {
            out += s[at];
        }
        ++at;
    }
    if (at >= s.size()) throw RecorderError("manifest: unterminated string");
    return at + 1;
}

ManifestValue parse_value(std::string_view v) {
    ManifestValue out;
    if (v.empty()) throw RecorderError("manifest: missing value");
    if (v.front() == '"') {
        parse_string(v, 0, out.scalar);
    } else if (v.front() == '[') {
        out.is_list = true;
        std::size_t at = 1;
        while (true) {
            while (at < v.size() && (v[at] == ' ' || v[at] == ',')) ++at;
            if (at >= v.size()) throw RecorderError("manifest: unterminated list");
            if (v[at] == ']') break;
            std::string item;
            at = parse_string(v, at, item);
            out.list.push_back(std::move(item));
        }
    } else {
        out.scalar = std::string(v);
    }
    return out;
}

double to_double(const std::string& s) {
    try {
        return std::stod(s);
    } catch (const std::exception&) {
        throw RecorderError("manifest: bad number " + s);
    }
}

std::uint64_t to_u64(const std::string& s) {
    try {
        return std::stoull(s);
    } catch (const std::exception&) {
        throw RecorderError("manifest: bad integer " + s);
    }
}

std::string read_if_exists(const fs::path& p) {
    if (!fs::exists(p)) return {};
    return text::read_file(p.string());
}

std::vector<std::vector<std::string>> csv_rows(const std::string& contents, std::size_t columns,
                                                const std::string& what) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(contents);
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (header) {
            header = false;
            continue;
        }
        if (line.empty()) continue;
        auto fields = text::parse_csv_line(line);
        if (fields.size() != columns) throw RecorderError("malformed row in " + what);
        rows.push_back(std::move(fields));
    }
    return rows;
}

}  // namespace

std::string render_manifest(const SessionManifest& m) {
    std::ostringstream out;
    out << "# cogtrace session manifest\n";
    out << "format = \"cogtrace-session\"\n";
    out << "version = 1\n";
    out << "timestamps = \"receiver\"\n";
    out << "session_id = " << quote(m.identity.session_id) << "\n";
    out << "participant_id = " << quote(m.identity.participant_id) << "\n";
    out << "started_at = " << quote(m.identity.started_at) << "\n";
    out << "duration_s = " << text::format_double(m.duration_s) << "\n";
    out << "total_bytes = " << m.total_bytes << "\n";
    out << "stream_count = " << m.streams.size() << "\n";
    for (const auto& s : m.streams) {
        out << "\n[[stream]]\n";
        out << "source_id = " << quote(s.info.source_id) << "\n";
        out << "name = " << quote(s.info.name) << "\n";
        out << "modality = " << quote(net::to_string(s.info.modality)) << "\n";
        out << "channel_count = " << s.info.channel_count << "\n";
        out << "nominal_rate = " << text::format_double(s.info.nominal_rate) << "\n";
        out << "channel_labels = [";
        for (std::size_t i = 0; i < s.info.channel_labels.size(); ++i)
            out << (i ? ", " : "") << quote(s.info.channel_labels[i]);
        out << "]\n";
        out << "file = " << quote(s.file) << "\n";
        out << "sample_count = " << s.sample_count << "\n";
        out << "bytes = " << s.bytes << "\n";
    }
    return out.str();
}

SessionManifest parse_manifest(std::string_view textv) {
    SessionManifest m;
    std::istringstream in{std::string(textv)};
    std::string raw;
    ManifestStream* current = nullptr;
    std::size_t declared_streams = 0;
    bool saw_format = false;
    while (std::getline(in, raw)) {
        auto line = text::trim(raw);
        if (line.empty() || line.front() == '#') continue;
        if (line == "[[stream]]") {
            m.streams.emplace_back();
            current = &m.streams.back();
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string_view::npos) throw RecorderError("manifest: bad line " + std::string(line));
        const std::string key(text::trim(line.substr(0, eq)));
        const auto value = parse_value(text::trim(line.substr(eq + 1)));
        if (current == nullptr) {
            if (key == "format") {
                if (value.scalar != "cogtrace-session") throw RecorderError("manifest: unknown format");
                saw_format = true;
            } else if (key == "version") {
                if (value.scalar != "1") throw RecorderError("manifest: unsupported version");
            } else if (key == "session_id") {
                m.identity.session_id = value.scalar;
            } else if (key == "participant_id") {
                m.identity.participant_id = value.scalar;
            } else if (key == "started_at") {
                m.identity.started_at = value.scalar;
            } else if (key == "duration_s") {
                m.duration_s = to_double(value.scalar);
            } else if (key == "total_bytes") {
                m.total_bytes = to_u64(value.scalar);
            } else if (key == "stream_count") {
                declared_streams = to_u64(value.scalar);
            }
            continue;
        }
        auto& info = current->info;
        if (key == "source_id") info.source_id = value.scalar;
        else if (key == "name") info.name = value.scalar;
        else if (key == "modality") {
            auto mod = net::parse_modality(value.scalar);
            if (!mod) throw RecorderError("manifest: unknown modality " + value.scalar);
            info.modality = *mod;
        } else if (key == "channel_count") info.channel_count = static_cast<std::uint32_t>(to_u64(value.scalar));
        else if (key == "nominal_rate") info.nominal_rate = to_double(value.scalar);
        else if (key == "channel_labels") info.channel_labels = value.list;
        else if (key == "file") current->file = value.scalar;
        else if (key == "sample_count") current->sample_count = to_u64(value.scalar);
        else if (key == "bytes") current->bytes = to_u64(value.scalar);
    }
    if (!saw_format) throw RecorderError("manifest: missing format line");
    if (declared_streams != m.streams.size()) throw RecorderError("manifest: stream count mismatch");
    for (const auto& s : m.streams) net::validate(s.info);
    return m;
}

SessionManifest write_session(const SessionData& data, const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir / "streams", ec);
    if (ec) throw RecorderError("cannot create session directory " + dir.string() + ": " + ec.message());
    if (fs::exists(dir / "manifest.toml"))
        throw RecorderError("session directory already holds a manifest: " + dir.string());

    SessionManifest m;
    m.identity = data.identity;
    std::set<std::string> names;
    double t_min = 0.0, t_max = 0.0;
    bool any = false;
    try {
        for (const auto& s : data.streams) {
            auto stem = file_stem_for(s.info.source_id);
            if (!names.insert(stem).second)
                throw RecorderError("source ids collide on disk: " + s.info.source_id);
            const std::string rel = "streams/" + stem + ".bin";
            text::write_file((dir / rel).string(), encode_stream(s));
            ManifestStream ms{s.info, rel, s.samples.size(), fs::file_size(dir / rel)};
            m.total_bytes += ms.bytes;
            m.streams.push_back(std::move(ms));
            if (!s.samples.empty()) {
                const double lo = s.samples.front().timestamp, hi = s.samples.back().timestamp;
                t_min = any ? std::min(t_min, lo) : lo;
                t_max = any ? std::max(t_max, hi) : hi;
                any = true;
            }
        }
        m.duration_s = any ? t_max - t_min : 0.0;

        std::string offsets = "source_id,measured_at,offset,round_trip\n";
        for (const auto& s : data.streams)
            for (const auto& o : s.offsets)
                offsets += text::csv_field(s.info.source_id) + "," + text::format_double(o.measured_at) +
                           "," + text::format_double(o.offset) + "," + text::format_double(o.round_trip) + "\n";
        text::write_file((dir / "offsets.csv").string(), offsets);

        std::string events = "receiver_time,kind,label\n";
        for (const auto& e : data.events)
            events += text::format_double(e.receiver_time) + "," + text::csv_field(e.kind) + "," +
                      text::csv_field(e.label) + "\n";
        text::write_file((dir / "events.csv").string(), events);

        std::string responses = "step_id,item_id,value\n";
        for (const auto& r : data.responses)
            responses += text::csv_field(r.step_id) + "," + text::csv_field(r.item_id) + "," +
                         text::csv_field(r.value) + "\n";
        text::write_file((dir / "responses.csv").string(), responses);

        text::write_file((dir / "manifest.toml").string(), render_manifest(m));
    } catch (const RecorderError&) {
        throw;
    } catch (const std::exception& e) {
        throw RecorderError(std::string("cannot write session: ") + e.what());
    }
    return m;
}

SessionManifest load_manifest(const fs::path& dir) {
    const auto path = dir / "manifest.toml";
    if (!fs::exists(path)) throw RecorderError("no manifest in " + dir.string());
    return parse_manifest(text::read_file(path.string()));
}

SessionData load_session(const fs::path& dir) {
    const auto m = load_manifest(dir);
    SessionData data;
    data.identity = m.identity;
    data.corrected = true;
    for (const auto& ms : m.streams) {
        StreamRecord rec;
        rec.info = ms.info;
        rec.samples = decode_stream(text::read_file((dir / ms.file).string()), ms.info.channel_count);
        if (rec.samples.size() != ms.sample_count)
            throw RecorderError("sample count mismatch for " + ms.info.source_id);
        data.streams.push_back(std::move(rec));
    }
    for (const auto& row : csv_rows(read_if_exists(dir / "offsets.csv"), 4, "offsets.csv")) {
        auto it = std::find_if(data.streams.begin(), data.streams.end(),
                               [&](const auto& s) { return s.info.source_id == row[0]; });
        if (it == data.streams.end()) throw RecorderError("offsets.csv names unknown stream " + row[0]);
        it->offsets.push_back({to_double(row[2]), to_double(row[3]), to_double(row[1])});
    }
    for (const auto& row : csv_rows(read_if_exists(dir / "events.csv"), 3, "events.csv"))
        data.events.push_back({to_double(row[0]), row[1], row[2]});
    for (const auto& row : csv_rows(read_if_exists(dir / "responses.csv"), 3, "responses.csv"))
        data.responses.push_back({row[0], row[1], row[2]});
    return data;
}

}  // namespace cogtrace::rec
