#include "snrlab/io.hpp"

#include "snrlab/error.hpp"

#include <nlohmann/json.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace snrlab::io {

using nlohmann::json;

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

constexpr const char* kFormat = "snrlab.spectrum";

using Meta = std::vector<std::pair<std::string, std::string>>;

Meta spectrum_meta(const Spectrum& sp) {
    const auto& c = sp.config;
    Meta m{
        {"format", kFormat},
        {"channel", std::string(to_string(c.channel))},
        {"n_pixels", std::to_string(c.n_pixels)},
        {"detuning_start_hz", format_double(ordinary(c.detuning_start))},
        {"detuning_stop_hz", format_double(ordinary(c.detuning_stop))},
        {"dwell_s", format_double(c.dwell)},
        {"n_scans", std::to_string(c.n_scans)},
        {"seed", std::to_string(c.seed)},
        {"jitter_sigma_hz", format_double(ordinary(c.jitter_sigma))},
        {"leak_fraction", format_double(c.leak_fraction)},
        {"p_las_cps", format_double(sp.drive.p_las)},
        {"clamped", std::to_string(sp.clamped)},
    };
    if (sp.setup) {
        const auto& [em, opt, det] = *sp.setup;
        m.insert(m.end(), {
                              {"gamma1_hz", format_double(ordinary(em.gamma1))},
                              {"gamma2_hz", format_double(ordinary(em.gamma2))},
                              {"alpha", format_double(em.alpha)},
                              {"k_geom", format_double(opt.k_geom)},
                              {"zeta", format_double(opt.zeta)},
                              {"mu", format_double(opt.mu)},
                              {"p_drk_cps", format_double(det.p_drk)},
                              {"rin_kappa", format_double(det.rin_kappa)},
                          });
    }
    return m;
}

double parse_double(const std::string& key, const std::string& text) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != text.size())
        throw ValidationError(key, "not a number: \"" + text + "\"");
    return v;
}

std::uint64_t parse_u64(const std::string& key, const std::string& text) {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size())
        throw ValidationError(key, "not a non-negative integer: \"" + text + "\"");
    return v;
}

// Applies metadata to a spectrum; keys it does not know are ignored.
void apply_meta(Spectrum& sp, const std::map<std::string, std::string>& meta) {
    auto num = [&](const char* k, double fallback) {
        const auto it = meta.find(k);
        return it == meta.end() ? fallback : parse_double(k, it->second);
    };
    auto& c = sp.config;
    if (auto it = meta.find("channel"); it != meta.end()) c.channel = channel_from_string(it->second);
    if (auto it = meta.find("n_scans"); it != meta.end())
        c.n_scans = static_cast<int>(parse_u64("n_scans", it->second));
    if (auto it = meta.find("seed"); it != meta.end()) c.seed = parse_u64("seed", it->second);
    if (auto it = meta.find("clamped"); it != meta.end()) sp.clamped = parse_u64("clamped", it->second);
    c.dwell = num("dwell_s", c.dwell);
    c.jitter_sigma = angular(num("jitter_sigma_hz", 0.0));
    c.leak_fraction = num("leak_fraction", 0.0);
    sp.drive.p_las = num("p_las_cps", 0.0);

    static constexpr const char* kPhysical[] = {"gamma1_hz", "gamma2_hz", "alpha",     "k_geom",
                                                "zeta",      "mu",        "p_drk_cps", "rin_kappa"};
    bool complete = true;
    for (const char* k : kPhysical) complete = complete && meta.count(k) != 0;
    if (complete) {
        Setup s;
        s.emitter = {angular(num("gamma1_hz", 0)), angular(num("gamma2_hz", 0)), num("alpha", 0)};
        s.optics = {num("k_geom", 0), num("zeta", 0), num("mu", 0)};
        s.detector = {num("p_drk_cps", 0), num("rin_kappa", 0)};
        s.validate();
        sp.setup = s;
    }
}

void finish_grid(Spectrum& sp) {
    if (sp.detunings.size() != sp.counts.size())
        throw ValidationError("spectrum", "detuning and count columns differ in length");
    if (sp.detunings.empty()) throw ValidationError("spectrum", "no data rows");
    sp.config.n_pixels = static_cast<int>(sp.detunings.size());
    sp.config.detuning_start = sp.detunings.front();
    sp.config.detuning_stop = sp.detunings.back();
}

} // namespace

void write_spectrum_csv(std::ostream& os, const Spectrum& sp) {
    for (const auto& [k, v] : spectrum_meta(sp)) os << "# " << k << '=' << v << '\n';
    os << "detuning_hz,counts\n";
    for (std::size_t i = 0; i < sp.size(); ++i)
        os << format_double(ordinary(sp.detunings[i])) << ',' << sp.counts[i] << '\n';
}

void write_spectrum_csv(const std::filesystem::path& path, const Spectrum& sp) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot open " + path.string() + " for writing");
    write_spectrum_csv(os, sp);
    if (!os) throw Error("failed writing " + path.string());
}

Spectrum read_spectrum_csv(std::istream& is) {
    Spectrum sp;
    std::map<std::string, std::string> meta;
    std::string line;
    bool header_seen = false;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line.front() == '#') {
            const auto body = line.find_first_not_of("# ");
            const auto eq = line.find('=');
            if (body != std::string::npos && eq != std::string::npos && eq > body)
                meta[line.substr(body, eq - body)] = line.substr(eq + 1);
            continue;
        }
        if (!header_seen) {
            if (line != "detuning_hz,counts")
                throw ValidationError("spectrum", "expected header \"detuning_hz,counts\" at line " +
                                                      std::to_string(line_no));
            header_seen = true;
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw ValidationError("spectrum", "malformed row at line " + std::to_string(line_no));
        const std::string where = "spectrum line " + std::to_string(line_no);
        sp.detunings.push_back(angular(parse_double(where, line.substr(0, comma))));
        sp.counts.push_back(parse_u64(where, line.substr(comma + 1)));
    }
    if (!header_seen) throw ValidationError("spectrum", "missing \"detuning_hz,counts\" header");
    if (auto it = meta.find("format"); it != meta.end() && it->second != kFormat)
        throw ValidationError("spectrum", "unsupported format \"" + it->second + "\"");
    apply_meta(sp, meta);
    finish_grid(sp);
    return sp;
}

Spectrum read_spectrum_csv(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("cannot open " + path.string());
    return read_spectrum_csv(is);
}

json spectrum_to_json(const Spectrum& sp) {
    json meta = json::object();
    for (const auto& [k, v] : spectrum_meta(sp)) meta[k] = v;
    json hz = json::array();
    for (double d : sp.detunings) hz.push_back(ordinary(d));
    return {{"metadata", meta}, {"detuning_hz", hz}, {"counts", sp.counts}};
}

Spectrum spectrum_from_json(const json& doc) {
    Spectrum sp;
    std::map<std::string, std::string> meta;
    if (doc.contains("metadata"))
        for (const auto& [k, v] : doc.at("metadata").items()) meta[k] = v.get<std::string>();
    for (double hz : doc.at("detuning_hz")) sp.detunings.push_back(angular(hz));
    sp.counts = doc.at("counts").get<std::vector<std::uint64_t>>();
    apply_meta(sp, meta);
    finish_grid(sp);
    return sp;
}

json fit_to_json(const FitResult& fit) {
    return {
        {"amplitude", fit.amplitude},
        {"center_hz", ordinary(fit.center)},
        {"fwhm_hz", ordinary(fit.fwhm)},
        {"baseline", fit.baseline},
        {"residual_rms", fit.residual_rms},
        {"converged", fit.converged},
        {"iterations", fit.iterations},
    };
}

std::string fit_csv_header() {
    return "amplitude,center_hz,fwhm_hz,baseline,residual_rms,converged,iterations";
}

std::string fit_csv_row(const FitResult& fit) {
    std::ostringstream os;
    os << format_double(fit.amplitude) << ',' << format_double(ordinary(fit.center)) << ','
       << format_double(ordinary(fit.fwhm)) << ',' << format_double(fit.baseline) << ','
       << format_double(fit.residual_rms) << ',' << (fit.converged ? 1 : 0) << ',' << fit.iterations;
    return os.str();
}

} // namespace snrlab::io
