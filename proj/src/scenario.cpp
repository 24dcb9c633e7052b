#include "pif/scenario.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "pif/metrics.hpp"

namespace pif {

const char* to_string(ProtocolMode m) {
    switch (m) {
    case ProtocolMode::PIF: return "pif";
    case ProtocolMode::TRM: return "trm";
    case ProtocolMode::Both: return "both";
    }
    return "pif";
}

ProtocolMode parse_mode(const std::string& text) {
    if (text == "pif") return ProtocolMode::PIF;
    if (text == "trm") return ProtocolMode::TRM;
    if (text == "both") return ProtocolMode::Both;
    throw ConfigError("protocol must be pif, trm or both, got '" + text + "'");
}

Index Scenario::resolved_padding() const {
    if (padding) return *padding;
    return required_padding(UnitSystem<double>{}, config.t_end, padding_margin);
}

ChainModel<double> Scenario::build_model() const {
    const Index s = resolved_padding();
    PotentialProfile profile;
    for (const auto& seg : segments) profile.segments.push_back({s + seg.first, s + seg.last, seg.height});
    profile.left = padding ? Boundary::HardWall : Boundary::OpenPadding;
    profile.right = Boundary::HardWall;
    // the wall itself is where psi vanishes: the last site is x_s + L - 1
    return build_chain<double>(s + cavity_length, s, profile);
}

WaveField<double> Scenario::build_packet(const ChainModel<double>& model) const {
    return gaussian_packet<double>(model, double(model.probe()) + packet_center, packet_sigma, packet_k0);
}

void Scenario::validate() const {
    if (cavity_length < 2) throw ValidationError("cavity_length must be at least 2");
    if (padding && *padding < 1) throw ValidationError("padding must be at least 1 site");
    if (padding_margin < 0) throw ValidationError("padding_margin must be non-negative");
    for (const auto& seg : segments) {
        if (seg.first < 1 || seg.last >= cavity_length || seg.first > seg.last) {
            throw ValidationError("segment " + std::to_string(seg.first) + ".." + std::to_string(seg.last) +
                                  " must lie inside the cavity (offsets 1 .. cavity_length-1)");
        }
    }
    if (!(packet_sigma > 0)) throw ValidationError("packet sigma must be positive");
    if (!(packet_center < 0)) throw ValidationError("packet center must lie left of the probe (negative offset)");
    config.validate();
    // builds the chain and packet, surfacing geometry errors at load time
    const auto model = build_model();
    build_packet(model);
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
    std::istringstream is(s);
    std::vector<std::string> out;
    for (std::string tok; is >> tok;) out.push_back(tok);
    return out;
}

double to_double(const std::string& tok) {
    double v = 0;
    const auto* end = tok.data() + tok.size();
    auto [p, ec] = std::from_chars(tok.data(), end, v);
    if (ec != std::errc() || p != end || !std::isfinite(v)) throw ConfigError("expected a number, got '" + tok + "'");
    return v;
}

Index to_index(const std::string& tok) {
    long long v = 0;
    const auto* end = tok.data() + tok.size();
    auto [p, ec] = std::from_chars(tok.data(), end, v);
    if (ec != std::errc() || p != end) throw ConfigError("expected an integer, got '" + tok + "'");
    return Index(v);
}

std::string single(const std::string& value) {
    auto toks = split_ws(value);
    if (toks.size() != 1) throw ConfigError("expected a single value, got '" + value + "'");
    return toks[0];
}

std::optional<double> auto_or_double(const std::string& v) {
    const auto t = single(v);
    if (t == "auto") return std::nullopt;
    return to_double(t);
}

} // namespace

Scenario parse_scenario(const std::string& text, const std::string& origin) {
    Scenario sc;
    auto& cfg = sc.config;
    bool have_cavity = false, have_center = false, have_sigma = false, have_k0 = false, have_tend = false;

    using Setter = std::function<void(const std::string&)>;
    const std::map<std::string, std::map<std::string, Setter>> keys = {
        {"", {{"name", [&](const std::string& v) { sc.name = single(v); }}}},
        {"lattice",
         {{"padding",
           [&](const std::string& v) {
               const auto t = single(v);
               if (t == "auto") sc.padding.reset();
               else sc.padding = to_index(t);
           }},
          {"padding_margin", [&](const std::string& v) { sc.padding_margin = to_index(single(v)); }},
          {"cavity_length",
           [&](const std::string& v) {
               sc.cavity_length = to_index(single(v));
               have_cavity = true;
           }},
          {"segment",
           [&](const std::string& v) {
               auto t = split_ws(v);
               if (t.size() != 3) throw ConfigError("segment needs 'first last height'");
               sc.segments.push_back({to_index(t[0]), to_index(t[1]), to_double(t[2])});
           }}}},
        {"packet",
         {{"center",
           [&](const std::string& v) {
               sc.packet_center = to_double(single(v));
               have_center = true;
           }},
          {"sigma",
           [&](const std::string& v) {
               sc.packet_sigma = to_double(single(v));
               have_sigma = true;
           }},
          {"k0",
           [&](const std::string& v) {
               sc.packet_k0 = to_double(single(v));
               have_k0 = true;
           }}}},
        {"stepper",
         {{"dt", [&](const std::string& v) { cfg.stepper.dt = to_double(single(v)); }},
          {"t_end",
           [&](const std::string& v) {
               cfg.t_end = to_double(single(v));
               have_tend = true;
           }}}},
        {"window",
         {{"threshold", [&](const std::string& v) { cfg.window.threshold = to_double(single(v)); }},
          {"guard", [&](const std::string& v) { cfg.window.guard = to_double(single(v)); }},
          {"min_peak", [&](const std::string& v) { cfg.window.min_peak = to_double(single(v)); }},
          {"t1", [&](const std::string& v) { cfg.pinned_t1 = auto_or_double(v); }},
          {"tR", [&](const std::string& v) { cfg.pinned_tR = auto_or_double(v); }}}},
        {"greens",
         {{"eta", [&](const std::string& v) { cfg.eta = auto_or_double(v); }},
          {"t_max", [&](const std::string& v) { cfg.greens_t_max = auto_or_double(v); }},
          {"grid_padding", [&](const std::string& v) { cfg.grid_padding = to_double(single(v)); }},
          {"band_margin", [&](const std::string& v) { cfg.band_margin = to_double(single(v)); }},
          {"fft_size",
           [&](const std::string& v) {
               const auto t = single(v);
               if (t == "auto") cfg.fft_size.reset();
               else cfg.fft_size = to_index(t);
           }}}},
        {"protocol",
         {{"mode", [&](const std::string& v) { sc.mode = parse_mode(single(v)); }},
          {"trm_c", [&](const std::string& v) { cfg.trm_c = to_double(single(v)); }},
          {"trm_record",
           [&](const std::string& v) {
               const auto t = single(v);
               if (t != "outgoing" && t != "full") throw ConfigError("trm_record must be outgoing or full");
               cfg.trm_outgoing_only = t == "outgoing";
           }},
          {"max_truncated_energy", [&](const std::string& v) { cfg.max_truncated_energy = to_double(single(v)); }},
          {"blowup_factor", [&](const std::string& v) { cfg.blowup_factor = to_double(single(v)); }},
          {"max_initial_cavity", [&](const std::string& v) { cfg.max_initial_cavity = to_double(single(v)); }},
          {"significance", [&](const std::string& v) { cfg.significance = to_double(single(v)); }},
          {"support_cutoff", [&](const std::string& v) { cfg.support_cutoff = to_double(single(v)); }},
          {"forward_samples", [&](const std::string& v) { cfg.forward_samples = to_index(single(v)); }}}},
        {"output",
         {{"dir", [&](const std::string& v) { sc.output_dir = single(v); }},
          {"snapshot_times",
           [&](const std::string& v) {
               for (const auto& t : split_ws(v)) cfg.snapshot_times.push_back(to_double(t));
           }}}},
    };
    const std::set<std::string> repeatable = {"segment", "snapshot_times"};

    std::istringstream in(text);
    std::string line, section;
    std::set<std::string> seen_sections, seen_keys;
    int lineno = 0;
    auto fail = [&](const std::string& msg) { throw ConfigError(origin + ":" + std::to_string(lineno) + ": " + msg); };

    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') fail("malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            if (!keys.count(section) || section.empty()) fail("unknown section [" + section + "]");
            if (!seen_sections.insert(section).second) fail("duplicate section [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) fail("expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const auto& sec = keys.at(section);
        const auto it = sec.find(key);
        if (it == sec.end()) {
            fail("unknown key '" + key + "'" + (section.empty() ? std::string() : " in [" + section + "]"));
        }
        if (!repeatable.count(key) && !seen_keys.insert(section + "." + key).second) fail("duplicate key '" + key + "'");
        if (value.empty()) fail("missing value for '" + key + "'");
        try {
            it->second(value);
        } catch (const ConfigError& e) {
            fail(e.what());
        }
    }

    lineno = 0;
    if (!have_cavity) fail("missing [lattice] cavity_length");
    if (!have_center || !have_sigma || !have_k0) fail("missing [packet] center, sigma or k0");
    if (!have_tend) fail("missing [stepper] t_end");
    try {
        sc.validate();
    } catch (const ValidationError& e) {
        throw ConfigError(origin + ": " + e.what());
    }
    return sc;
}

Scenario load_scenario(const std::string& path) {
    if (!std::filesystem::is_regular_file(path)) throw ScenarioNotFound("scenario not found: " + path);
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ScenarioNotFound("cannot open scenario: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_scenario(ss.str(), path);
}

std::string effective_scenario(const Scenario& s) {
    const auto& c = s.config;
    auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string("auto"); };
    std::ostringstream os;
    os << "name = " << s.name << "\n\n[lattice]\n";
    os << "padding = " << s.resolved_padding() << "\n";
    os << "padding_margin = " << s.padding_margin << "\n";
    os << "cavity_length = " << s.cavity_length << "\n";
    for (const auto& seg : s.segments) {
        os << "segment = " << seg.first << ' ' << seg.last << ' ' << format_double(seg.height) << "\n";
    }
    os << "\n[packet]\ncenter = " << format_double(s.packet_center) << "\nsigma = " << format_double(s.packet_sigma)
       << "\nk0 = " << format_double(s.packet_k0) << "\n";
    os << "\n[stepper]\ndt = " << format_double(c.stepper.dt) << "\nt_end = " << format_double(c.t_end) << "\n";
    os << "\n[window]\nthreshold = " << format_double(c.window.threshold) << "\nguard = " << format_double(c.window.guard)
       << "\nmin_peak = " << format_double(c.window.min_peak) << "\nt1 = " << opt(c.pinned_t1)
       << "\ntR = " << opt(c.pinned_tR) << "\n";
    os << "\n[greens]\neta = " << opt(c.eta) << "\nt_max = " << opt(c.greens_t_max)
       << "\ngrid_padding = " << format_double(c.grid_padding) << "\nband_margin = " << format_double(c.band_margin)
       << "\nfft_size = " << (c.fft_size ? std::to_string(*c.fft_size) : std::string("auto")) << "\n";
    os << "\n[protocol]\nmode = " << to_string(s.mode) << "\ntrm_c = " << format_double(c.trm_c)
       << "\ntrm_record = " << (c.trm_outgoing_only ? "outgoing" : "full")
       << "\nmax_truncated_energy = " << format_double(c.max_truncated_energy)
       << "\nblowup_factor = " << format_double(c.blowup_factor)
       << "\nmax_initial_cavity = " << format_double(c.max_initial_cavity)
       << "\nsignificance = " << format_double(c.significance)
       << "\nsupport_cutoff = " << format_double(c.support_cutoff) << "\nforward_samples = " << c.forward_samples
       << "\n";
    if (!c.snapshot_times.empty()) {
        os << "\n[output]\nsnapshot_times =";
        for (double t : c.snapshot_times) os << ' ' << format_double(t);
        os << "\n";
    }
    return os.str();
}

} // namespace pif
