#include "snrlab/config.hpp"

#include "snrlab/error.hpp"
#include "snrlab/model.hpp"
#include "snrlab/scenarios.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <map>
#include <set>

namespace snrlab {

using nlohmann::json;

namespace {

// Read-only view of one JSON object section that remembers its path.
class Section {
public:
    Section(const json& doc, std::string path) : doc_(doc), path_(std::move(path)) {
        if (!doc_.is_object()) throw ValidationError(path_, "must be an object");
    }

    void allow_only(std::initializer_list<const char*> keys) const {
        const std::set<std::string> allowed(keys.begin(), keys.end());
        for (const auto& [k, v] : doc_.items())
            if (!allowed.count(k)) throw ValidationError(field(k), "unknown key");
    }

    bool has(const char* key) const { return doc_.contains(key); }

    double number(const char* key, double fallback) const {
        if (!has(key)) return fallback;
        const auto& v = doc_.at(key);
        if (!v.is_number()) throw ValidationError(field(key), "must be a number");
        return v.get<double>();
    }

    template <class Int>
    Int integer(const char* key, Int fallback) const {
        if (!has(key)) return fallback;
        const auto& v = doc_.at(key);
        if (!v.is_number_integer()) throw ValidationError(field(key), "must be an integer");
        if (v.is_number_unsigned()) return static_cast<Int>(v.get<std::uint64_t>());
        const auto i = v.get<std::int64_t>();
        if (i < 0 && std::is_unsigned_v<Int>) throw ValidationError(field(key), "must be >= 0");
        return static_cast<Int>(i);
    }

    std::string text(const char* key, std::string fallback) const {
        if (!has(key)) return fallback;
        const auto& v = doc_.at(key);
        if (!v.is_string()) throw ValidationError(field(key), "must be a string");
        return v.get<std::string>();
    }

    const json& raw(const char* key) const { return doc_.at(key); }

    Section child(const char* key) const { return Section(doc_.at(key), field(key)); }

    std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

private:
    const json& doc_;
    std::string path_;
};

void one_of(const Section& s, const char* a, const char* b) {
    if (s.has(a) && s.has(b))
        throw ValidationError(s.field(b), std::string("conflicts with ") + a);
}

void read_emitter(const Section& s, EmitterParams& em) {
    s.allow_only({"gamma1_hz", "gamma1_rad_s", "gamma2_hz", "gamma2_rad_s", "alpha"});
    one_of(s, "gamma1_hz", "gamma1_rad_s");
    one_of(s, "gamma2_hz", "gamma2_rad_s");
    const bool new_gamma1 = s.has("gamma1_hz") || s.has("gamma1_rad_s");
    if (s.has("gamma1_hz")) em.gamma1 = angular(s.number("gamma1_hz", 0));
    if (s.has("gamma1_rad_s")) em.gamma1 = s.number("gamma1_rad_s", 0);
    if (s.has("gamma2_hz")) em.gamma2 = angular(s.number("gamma2_hz", 0));
    else if (s.has("gamma2_rad_s")) em.gamma2 = s.number("gamma2_rad_s", 0);
    else if (new_gamma1) em.gamma2 = 0.5 * em.gamma1;  // lifetime limited unless stated
    em.alpha = s.number("alpha", em.alpha);
}

Channel read_channel(const Section& s, const char* key, const std::string& text) {
    try {
        return channel_from_string(text);
    } catch (const ValidationError& e) {
        throw ValidationError(s.field(key), std::string(e.what()).substr(e.field().size() + 2));
    }
}

// Library validators name struct members; report the config key instead.
std::string config_key(const std::string& field) {
    static const std::map<std::string, std::string> renamed{
        {"scan.detuning_start", "scan.detuning_start_hz"},
        {"scan.detuning_stop", "scan.detuning_stop_hz"},
        {"scan.dwell", "scan.dwell_s"},
        {"scan.jitter_sigma", "scan.jitter_sigma_hz"},
        {"detector.p_drk", "detector.p_drk_cps"},
        {"drive.p_las", "drive.power_cps"},
        {"drive.detuning", "drive.detuning_hz"},
    };
    const auto it = renamed.find(field);
    return it == renamed.end() ? field : it->second;
}

void read_scan(const Section& s, RunConfig& rc) {
    s.allow_only({"detuning_start_hz", "detuning_stop_hz", "half_widths", "n_pixels", "dwell_s",
                  "n_scans", "channel", "seed", "jitter_sigma_hz", "leak_fraction", "threads"});
    auto& c = rc.scan;
    if (s.has("detuning_start_hz") != s.has("detuning_stop_hz"))
        throw ValidationError(s.field("detuning_stop_hz"),
                              "detuning_start_hz and detuning_stop_hz must be given together");
    if (s.has("detuning_start_hz")) {
        rc.explicit_grid = true;
        c.detuning_start = angular(s.number("detuning_start_hz", 0));
        c.detuning_stop = angular(s.number("detuning_stop_hz", 0));
    }
    rc.half_widths = s.number("half_widths", rc.half_widths);
    c.n_pixels = s.integer<int>("n_pixels", c.n_pixels);
    c.dwell = s.number("dwell_s", c.dwell);
    c.n_scans = s.integer<int>("n_scans", c.n_scans);
    if (s.has("channel")) c.channel = read_channel(s, "channel", s.text("channel", ""));
    c.seed = s.integer<std::uint64_t>("seed", c.seed);
    c.jitter_sigma = angular(s.number("jitter_sigma_hz", ordinary(c.jitter_sigma)));
    c.leak_fraction = s.number("leak_fraction", c.leak_fraction);
    rc.threads = s.integer<unsigned>("threads", rc.threads);
}

void read_sweep(const Section& s, RunConfig& rc) {
    s.allow_only({"power_min_cps", "power_max_cps", "points", "powers_cps", "reps", "channels"});
    const bool range = s.has("power_min_cps") || s.has("power_max_cps") || s.has("points");
    if (range && s.has("powers_cps"))
        throw ValidationError(s.field("powers_cps"), "give either powers_cps or a min/max/points range");
    if (range) {
        const double lo = s.number("power_min_cps", 1e3);
        const double hi = s.number("power_max_cps", 1e7);
        const auto n = s.integer<std::size_t>("points", 9);
        if (n < 2) throw ValidationError(s.field("points"), "must be >= 2");
        if (!(lo > 0.0) || !(hi > lo))
            throw ValidationError(s.field("power_max_cps"), "need 0 < power_min_cps < power_max_cps");
        rc.sweep_powers = scenarios::log_space(lo, hi, n);
    }
    if (s.has("powers_cps")) {
        const auto& arr = s.raw("powers_cps");
        if (!arr.is_array() || arr.empty())
            throw ValidationError(s.field("powers_cps"), "must be a non-empty array");
        rc.sweep_powers.clear();
        for (const auto& v : arr) {
            if (!v.is_number()) throw ValidationError(s.field("powers_cps"), "must contain numbers");
            rc.sweep_powers.push_back(v.get<double>());
        }
    }
    rc.reps = s.integer<int>("reps", rc.reps);
    if (s.has("channels")) {
        const auto& arr = s.raw("channels");
        if (!arr.is_array() || arr.empty())
            throw ValidationError(s.field("channels"), "must be a non-empty array");
        rc.sweep_channels.clear();
        for (const auto& v : arr) {
            if (!v.is_string()) throw ValidationError(s.field("channels"), "must contain strings");
            rc.sweep_channels.push_back(read_channel(s, "channels", v.get<std::string>()));
        }
    }
}

} // namespace

DriveParams RunConfig::drive() const {
    return {power_is_detected ? model::incident_from_detected(power, setup.optics) : power, detuning};
}

double RunConfig::detected_power() const { return power_is_detected ? power : setup.optics.mu * power; }

ScanConfig RunConfig::resolved_scan() const {
    if (explicit_grid) return scan;
    const double s = model::saturation_from_power(drive(), setup.emitter, setup.optics);
    ScanConfig c = ScanConfig::centered(s, setup.emitter, scan.channel, half_widths, scan.n_pixels);
    c.dwell = scan.dwell;
    c.n_scans = scan.n_scans;
    c.seed = scan.seed;
    c.jitter_sigma = scan.jitter_sigma;
    c.leak_fraction = scan.leak_fraction;
    return c;
}

void RunConfig::validate() const {
    setup.validate();
    require_dip_prefactor(setup.emitter, setup.optics);
    drive().validate();
    resolved_scan().validate();
    if (!(half_widths > 0.0)) throw ValidationError("scan.half_widths", "must be > 0");
    if (reps < 0) throw ValidationError("sweep.reps", "must be >= 0");
    for (double p : sweep_powers)
        if (!(p > 0.0) || !std::isfinite(p)) throw ValidationError("sweep.powers_cps", "powers must be > 0");
    if (!(t_int > 0.0)) throw ValidationError("analysis.t_int_s", "must be > 0");
}

RunConfig parse_run_config(const json& doc) {
    const Section root(doc, "");
    root.allow_only({"preset", "emitter", "optics", "detector", "drive", "scan", "sweep", "analysis"});

    RunConfig rc;
    rc.preset_name = root.text("preset", rc.preset_name);
    rc.setup = scenarios::preset(rc.preset_name).setup;

    if (root.has("emitter")) read_emitter(root.child("emitter"), rc.setup.emitter);
    if (root.has("optics")) {
        const auto s = root.child("optics");
        s.allow_only({"k_geom", "zeta", "mu"});
        auto& o = rc.setup.optics;
        o = {s.number("k_geom", o.k_geom), s.number("zeta", o.zeta), s.number("mu", o.mu)};
    }
    if (root.has("detector")) {
        const auto s = root.child("detector");
        s.allow_only({"p_drk_cps", "rin_kappa"});
        auto& d = rc.setup.detector;
        d = {s.number("p_drk_cps", d.p_drk), s.number("rin_kappa", d.rin_kappa)};
    }
    if (root.has("drive")) {
        const auto s = root.child("drive");
        s.allow_only({"power_cps", "power_semantics", "detuning_hz"});
        rc.power = s.number("power_cps", rc.power);
        const auto sem = s.text("power_semantics", "detected");
        if (sem != "detected" && sem != "incident")
            throw ValidationError(s.field("power_semantics"), "must be \"detected\" or \"incident\"");
        rc.power_is_detected = sem == "detected";
        rc.detuning = angular(s.number("detuning_hz", 0.0));
    }
    if (root.has("scan")) read_scan(root.child("scan"), rc);
    if (root.has("sweep")) read_sweep(root.child("sweep"), rc);
    if (root.has("analysis")) {
        const auto s = root.child("analysis");
        s.allow_only({"t_int_s", "snr_target"});
        rc.t_int = s.number("t_int_s", rc.t_int);
        rc.snr_target = s.number("snr_target", rc.snr_target);
    }
    try {
        rc.validate();
    } catch (const ValidationError& e) {
        const std::string key = config_key(e.field());
        if (key == e.field()) throw;
        throw ValidationError(key, std::string(e.what()).substr(e.field().size() + 2));
    }
    return rc;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw Error("cannot open config " + path.string());
    json doc;
    try {
        doc = json::parse(is);
    } catch (const json::parse_error& e) {
        throw ValidationError("", path.string() + ": " + e.what());
    }
    return parse_run_config(doc);
}

} // namespace snrlab
