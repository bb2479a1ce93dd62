#include "fmx/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <openssl/evp.h>

#include "fmx/errors.hpp"
#include "fmx/estim.hpp"
#include "fmx/geomchan.hpp"
#include "fmx/rate.hpp"
#include "fmx/sigcore.hpp"
#include "fmx/stochchan.hpp"
#include "fmx/version.hpp"

namespace fmx::experiment {

using stochchan::cplx;

// ---------------------------------------------------------------------------
// Identifiers and value formatting

std::string to_string(ExperimentId id) {
    switch (id) {
        case ExperimentId::fig2: return "fig2";
        case ExperimentId::fig3: return "fig3";
        case ExperimentId::fig4a: return "fig4a";
        case ExperimentId::fig4b: return "fig4b";
        case ExperimentId::validate: return "validate";
    }
    return "unknown";
}

ExperimentId experiment_from_string(const std::string& name) {
    for (auto id : {ExperimentId::fig2, ExperimentId::fig3, ExperimentId::fig4a, ExperimentId::fig4b,
                    ExperimentId::validate})
        if (to_string(id) == name) return id;
    throw ConfigError("experiment.id", "unknown experiment '" + name + "'");
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, ','))
        if (auto t = trim(item); !t.empty()) out.push_back(t);
    return out;
}

// Shortest representation that parses back to the same double.
std::string format_double(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    T value{};
    auto r = std::from_chars(t.data(), t.data() + t.size(), value);
    if (r.ec != std::errc() || r.ptr != t.data() + t.size() || t.empty())
        throw ConfigError(key, "cannot parse '" + text + "'");
    return value;
}

std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) out += (i ? ", " : "") + items[i];
    return out;
}

// One config key: how to print it and how to set it from text.
struct Field {
    std::string section;
    std::string key;
    std::function<std::string(const ExperimentConfig&)> get;
    std::function<void(ExperimentConfig&, const std::string&)> set;

    std::string path() const { return section + "." + key; }
};

template <typename Access>
Field real_field(std::string section, std::string key, Access access) {
    const std::string path = section + "." + key;
    return {section, key, [access](const ExperimentConfig& c) { return format_double(access(const_cast<ExperimentConfig&>(c))); },
            [access, path](ExperimentConfig& c, const std::string& v) { access(c) = parse_number<double>(path, v); }};
}

template <typename Access>
Field int_field(std::string section, std::string key, Access access) {
    using T = std::remove_reference_t<decltype(access(std::declval<ExperimentConfig&>()))>;
    const std::string path = section + "." + key;
    return {section, key, [access](const ExperimentConfig& c) { return std::to_string(access(const_cast<ExperimentConfig&>(c))); },
            [access, path](ExperimentConfig& c, const std::string& v) { access(c) = parse_number<T>(path, v); }};
}

template <typename Access>
Field text_field(std::string section, std::string key, Access access) {
    return {section, key, [access](const ExperimentConfig& c) { return access(const_cast<ExperimentConfig&>(c)); },
            [access](ExperimentConfig& c, const std::string& v) { access(c) = trim(v); }};
}

template <typename Access>
Field triple_field(std::string section, std::string key, Access access) {
    const std::string path = section + "." + key;
    return {section, key,
            [access](const ExperimentConfig& c) {
                const Triple& t = access(const_cast<ExperimentConfig&>(c));
                return format_double(t[0]) + ", " + format_double(t[1]) + ", " + format_double(t[2]);
            },
            [access, path](ExperimentConfig& c, const std::string& v) {
                const auto items = split_list(v);
                if (items.size() != 3) throw ConfigError(path, "expected three comma-separated values");
                Triple& t = access(c);
                for (std::size_t i = 0; i < 3; ++i) t[i] = parse_number<double>(path, items[i]);
            }};
}

const std::vector<Field>& fields() {
    using C = ExperimentConfig;
    static const std::vector<Field> all = {
        {"experiment", "id", [](const C& c) { return to_string(c.id); },
         [](C& c, const std::string& v) { c.id = experiment_from_string(trim(v)); }},
        int_field("experiment", "trials", [](C& c) -> std::size_t& { return c.trials; }),
        int_field("experiment", "seed", [](C& c) -> std::uint64_t& { return c.seed; }),
        text_field("experiment", "output_dir", [](C& c) -> std::string& { return c.output_dir; }),
        int_field("experiment", "threads", [](C& c) -> unsigned& { return c.threads; }),

        triple_field("geometry", "bs_first", [](C& c) -> Triple& { return c.geometry.bs_first; }),
        triple_field("geometry", "frm_first", [](C& c) -> Triple& { return c.geometry.frm_first; }),
        triple_field("geometry", "user", [](C& c) -> Triple& { return c.geometry.user; }),
        real_field("geometry", "bs_spacing", [](C& c) -> double& { return c.geometry.bs_spacing; }),
        real_field("geometry", "frm_spacing", [](C& c) -> double& { return c.geometry.frm_spacing; }),
        real_field("geometry", "reference_distance", [](C& c) -> double& { return c.geometry.reference_distance; }),
        real_field("geometry", "pathloss_exponent", [](C& c) -> double& { return c.geometry.pathloss_exponent; }),
        text_field("geometry", "pathloss_interpretation",
                   [](C& c) -> std::string& { return c.geometry.pathloss_interpretation; }),
        real_field("geometry", "light_speed", [](C& c) -> double& { return c.geometry.light_speed; }),

        real_field("plan", "carrier", [](C& c) -> double& { return c.plan.carrier; }),
        int_field("plan", "M", [](C& c) -> int& { return c.plan.M; }),
        int_field("plan", "V", [](C& c) -> int& { return c.plan.V; }),
        int_field("plan", "S", [](C& c) -> int& { return c.plan.S; }),
        real_field("plan", "normalized_spacing", [](C& c) -> double& { return c.plan.normalized_spacing; }),
        real_field("plan", "max_delay", [](C& c) -> double& { return c.plan.max_delay; }),
        real_field("plan", "bandwidth", [](C& c) -> double& { return c.plan.bandwidth; }),
        int_field("plan", "L", [](C& c) -> int& { return c.plan.L; }),
        text_field("plan", "amplitude_law", [](C& c) -> std::string& { return c.plan.amplitude_law; }),

        real_field("sweep", "power_db_start", [](C& c) -> double& { return c.sweep.power_db_start; }),
        real_field("sweep", "power_db_stop", [](C& c) -> double& { return c.sweep.power_db_stop; }),
        real_field("sweep", "power_db_step", [](C& c) -> double& { return c.sweep.power_db_step; }),
        real_field("sweep", "distance_start", [](C& c) -> double& { return c.sweep.distance_start; }),
        real_field("sweep", "distance_stop", [](C& c) -> double& { return c.sweep.distance_stop; }),
        real_field("sweep", "distance_step", [](C& c) -> double& { return c.sweep.distance_step; }),
        real_field("sweep", "user_height", [](C& c) -> double& { return c.sweep.user_height; }),
        real_field("sweep", "i_start", [](C& c) -> double& { return c.sweep.i_start; }),
        real_field("sweep", "i_stop", [](C& c) -> double& { return c.sweep.i_stop; }),
        real_field("sweep", "i_step", [](C& c) -> double& { return c.sweep.i_step; }),
        {"sweep", "grid_sizes",
         [](const C& c) {
             std::vector<std::string> s;
             for (int n : c.sweep.grid_sizes) s.push_back(std::to_string(n));
             return join(s);
         },
         [](C& c, const std::string& v) {
             c.sweep.grid_sizes.clear();
             for (const auto& item : split_list(v)) c.sweep.grid_sizes.push_back(parse_number<int>("sweep.grid_sizes", item));
         }},
        {"sweep", "models", [](const C& c) { return join(c.sweep.models); },
         [](C& c, const std::string& v) { c.sweep.models = split_list(v); }},

        int_field("signal", "carrier", [](C& c) -> int& { return c.signal.carrier; }),
        int_field("signal", "sample_rate", [](C& c) -> int& { return c.signal.sample_rate; }),
        int_field("signal", "filter_taps", [](C& c) -> int& { return c.signal.filter_taps; }),
        int_field("signal", "scenes", [](C& c) -> int& { return c.signal.scenes; }),
    };
    return all;
}

}  // namespace

// ---------------------------------------------------------------------------
// Config

ExperimentConfig ExperimentConfig::defaults(ExperimentId id) {
    ExperimentConfig c;
    c.id = id;
    switch (id) {
        case ExperimentId::fig2:
            c.plan.M = c.plan.V = c.plan.S = 1;
            c.plan.normalized_spacing = 0.1;
            c.trials = 1;
            break;
        case ExperimentId::validate:
            c.trials = 2000;
            break;
        default:
            break;
    }
    return c;
}

void ExperimentConfig::validate() const {
    if (trials < 1) throw ConfigError("experiment.trials", "must be >= 1");
    if (plan.M < 1) throw ConfigError("plan.M", "must be >= 1");
    if (plan.V < 0 || plan.S < 0) throw ConfigError("plan.V", "V and S must be non-negative");
    if (plan.L < 1) throw ConfigError("plan.L", "must be >= 1");
    if (!(plan.normalized_spacing > 0.0)) throw ConfigError("plan.normalized_spacing", "must be positive");
    if (!(plan.max_delay > 0.0)) throw ConfigError("plan.max_delay", "must be positive");
    if (!(plan.carrier > 0.0)) throw ConfigError("plan.carrier", "must be positive");
    if (plan.amplitude_law != "rayleigh" && plan.amplitude_law != "constant")
        throw ConfigError("plan.amplitude_law", "expected 'rayleigh' or 'constant'");
    if (geometry.pathloss_interpretation != "amplitude" && geometry.pathloss_interpretation != "power")
        throw ConfigError("geometry.pathloss_interpretation", "expected 'amplitude' or 'power'");
    if (!(geometry.bs_spacing > 0.0)) throw ConfigError("geometry.bs_spacing", "must be positive");
    if (!(geometry.frm_spacing > 0.0)) throw ConfigError("geometry.frm_spacing", "must be positive");
    if (!(geometry.reference_distance > 0.0)) throw ConfigError("geometry.reference_distance", "must be positive");
    if (!(geometry.pathloss_exponent > 0.0)) throw ConfigError("geometry.pathloss_exponent", "must be positive");
    if (!(geometry.light_speed > 0.0)) throw ConfigError("geometry.light_speed", "must be positive");
    auto check_grid = [](const char* key, double start, double stop, double step) {
        if (!(step > 0.0)) throw ConfigError(std::string("sweep.") + key + "_step", "must be positive");
        if (!(stop >= start)) throw ConfigError(std::string("sweep.") + key + "_stop", "must be >= start");
    };
    check_grid("power_db", sweep.power_db_start, sweep.power_db_stop, sweep.power_db_step);
    check_grid("distance", sweep.distance_start, sweep.distance_stop, sweep.distance_step);
    check_grid("i", sweep.i_start, sweep.i_stop, sweep.i_step);
    if (!(sweep.i_start > 0.0)) throw ConfigError("sweep.i_start", "must be positive");
    if (!(sweep.distance_start > 0.0)) throw ConfigError("sweep.distance_start", "must be positive");
    if (sweep.grid_sizes.empty()) throw ConfigError("sweep.grid_sizes", "must not be empty");
    for (int n : sweep.grid_sizes)
        if (n < 1) throw ConfigError("sweep.grid_sizes", "entries must be >= 1");
    if (sweep.models.empty()) throw ConfigError("sweep.models", "must not be empty");
    for (const auto& m : sweep.models) {
        try {
            (void)stochchan::correlation_model_from_string(m);
        } catch (const ConfigError&) {
            throw ConfigError("sweep.models", "unknown correlation model '" + m + "'");
        }
    }
    if (signal.scenes < 1) throw ConfigError("signal.scenes", "must be >= 1");
    try {
        sigcore::NormalizedUnits{signal.carrier, signal.sample_rate}.validate();
    } catch (const ConfigError& e) {
        throw ConfigError("signal", e.what());
    }
    if (signal.filter_taps < 3 || signal.filter_taps % 2 == 0)
        throw ConfigError("signal.filter_taps", "must be odd and >= 3");
}

ExperimentConfig parse_config(const std::string& ini_text, ExperimentId fallback) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    std::istringstream in(ini_text);
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError("ini", std::string("line ") + std::to_string(e.line()) + ": " + e.message());
    }

    ExperimentId id = fallback;
    if (auto v = tree.get_optional<std::string>("experiment.id")) id = experiment_from_string(trim(*v));
    ExperimentConfig config = ExperimentConfig::defaults(id);

    for (const auto& [section, body] : tree) {
        if (body.empty() && !body.data().empty())
            throw ConfigError(section, "keys must live inside a [section]");
        for (const auto& [key, value] : body) {
            const std::string path = section + "." + key;
            const auto& all = fields();
            auto it = std::find_if(all.begin(), all.end(), [&](const Field& f) { return f.path() == path; });
            if (it == all.end()) throw ConfigError(path, "unknown key");
            it->set(config, value.data());
        }
    }
    config.validate();
    return config;
}

ExperimentConfig load_config(const std::filesystem::path& path, ExperimentId fallback) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config", "cannot open " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), fallback);
}

std::string to_ini(const ExperimentConfig& config) {
    std::ostringstream out;
    out << "; " << kConfigFormat << "\n";
    std::string current;
    for (const Field& f : fields()) {
        if (f.section != current) {
            out << (current.empty() ? "" : "\n") << "[" << f.section << "]\n";
            current = f.section;
        }
        out << f.key << " = " << f.get(config) << "\n";
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// Helpers

std::vector<double> linear_grid(double start, double stop, double step) {
    if (!(step > 0.0)) throw ConfigError("step", "must be positive");
    const auto n = std::size_t(std::floor((stop - start) / step + 1e-9)) + 1;
    std::vector<double> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        // Snap to 1e-9 so integer-valued points are exact.
        out[k] = std::round((start + double(k) * step) * 1e9) / 1e9;
    }
    return out;
}

std::string Table::to_csv() const {
    std::string out;
    for (std::size_t i = 0; i < columns.size(); ++i) out += (i ? "," : "") + columns[i];
    out += "\n";
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + row[i];
        out += "\n";
    }
    return out;
}

std::size_t count_fades(const std::vector<double>& series, double min_depth) {
    std::vector<std::size_t> minima;
    for (std::size_t k = 1; k + 1 < series.size(); ++k)
        if (series[k] < series[k - 1] && series[k] <= series[k + 1]) minima.push_back(k);
    std::size_t count = 0;
    for (std::size_t i = 0; i < minima.size(); ++i) {
        const std::size_t k = minima[i];
        const std::size_t lo = i == 0 ? 0 : minima[i - 1];
        const std::size_t hi = i + 1 == minima.size() ? series.size() - 1 : minima[i + 1];
        const double left = *std::max_element(series.begin() + std::ptrdiff_t(lo), series.begin() + std::ptrdiff_t(k) + 1);
        const double right = *std::max_element(series.begin() + std::ptrdiff_t(k), series.begin() + std::ptrdiff_t(hi) + 1);
        if (std::min(left, right) - series[k] > min_depth) ++count;
    }
    return count;
}

double standard_deviation(const std::vector<double>& series) {
    RunningMoments m;
    for (double v : series) m.add(v);
    return std::sqrt(m.variance());
}

std::string sha256_hex(const std::string& data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr);
    std::ostringstream out;
    for (unsigned int i = 0; i < len; ++i) out << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
    return out.str();
}

namespace {

geomchan::SceneGeometry make_geometry(const ExperimentConfig& c) {
    geomchan::SceneGeometry g;
    const auto& gb = c.geometry;
    g.bs_first = {gb.bs_first[0], gb.bs_first[1], gb.bs_first[2]};
    g.frm_first = {gb.frm_first[0], gb.frm_first[1], gb.frm_first[2]};
    g.user = {gb.user[0], gb.user[1], gb.user[2]};
    g.bs_spacing = gb.bs_spacing;
    g.frm_spacing = gb.frm_spacing;
    g.M = c.plan.M;
    g.V = c.plan.V;
    g.S = c.plan.S;
    return g;
}

geomchan::PathlossModel make_pathloss(const ExperimentConfig& c) {
    geomchan::PathlossModel pl;
    pl.reference_distance = c.geometry.reference_distance;
    pl.exponent = c.geometry.pathloss_exponent;
    pl.light_speed = c.geometry.light_speed;
    pl.interpretation = c.geometry.pathloss_interpretation == "power" ? geomchan::PathlossInterpretation::power
                                                                      : geomchan::PathlossInterpretation::amplitude;
    return pl;
}

stochchan::FrequencyPlan make_plan(const ExperimentConfig& c, int V, int S, double i) {
    auto plan = stochchan::FrequencyPlan::with_normalized_spacing(i, V, S, c.plan.max_delay, c.plan.carrier);
    plan.bandwidth = c.plan.bandwidth;
    return plan;
}

stochchan::FrequencyPlan make_plan(const ExperimentConfig& c) {
    return make_plan(c, c.plan.V, c.plan.S, c.plan.normalized_spacing);
}

stochchan::ChannelDrawOptions make_draw(const ExperimentConfig& c) {
    return {c.plan.L, c.plan.amplitude_law == "constant" ? stochchan::AmplitudeLaw::constant
                                                         : stochchan::AmplitudeLaw::rayleigh};
}

}  // namespace

// ---------------------------------------------------------------------------
// fig2: gain versus user distance, classical two-path against FMx branches

ExperimentOutput run_fig2(const ExperimentConfig& config) {
    config.validate();
    auto geom = make_geometry(config);
    geom.M = geom.V = geom.S = 1;
    const auto pl = make_pathloss(config);
    auto plan = make_plan(config, 1, 1, config.plan.normalized_spacing);

    ExperimentOutput out;
    out.table.columns = {"distance_m", "gain_classical_db", "gain_direct_db", "gain_plus_db", "gain_minus_db"};
    std::vector<double> classical, direct, plus, minus;
    for (double offset : linear_grid(config.sweep.distance_start, config.sweep.distance_stop, config.sweep.distance_step)) {
        geom.user = geom.bs_first + geomchan::Point{-offset, 0.0, 0.0};
        geom.user.z() = config.sweep.user_height;
        const double distance = (geom.user - geom.bs_first).norm();
        const auto c = geomchan::assemble_two_path_channels(geom, pl, plan);
        classical.push_back(db10(geomchan::classical_two_path_gain(geom, pl, plan.carrier, geom.user)));
        direct.push_back(db10(std::norm(c.direct[0])));
        plus.push_back(db10(std::norm(c.z_plus[0][0])));
        minus.push_back(db10(std::norm(c.z_minus[0][0])));
        out.table.rows.push_back({format_double(distance), format_double(classical.back()), format_double(direct.back()),
                                  format_double(plus.back()), format_double(minus.back())});
    }
    out.summary = {
        {"std_db", {{"classical", standard_deviation(classical)},
                    {"direct", standard_deviation(direct)},
                    {"plus", standard_deviation(plus)},
                    {"minus", standard_deviation(minus)}}},
        {"fades_deeper_than_1db", {{"classical", count_fades(classical, 1.0)},
                                   {"direct", count_fades(direct, 1.0)},
                                   {"plus", count_fades(plus, 1.0)},
                                   {"minus", count_fades(minus, 1.0)}}},
        {"mixing_frequency_hz", plan.mixing_frequency(0)},
    };
    return out;
}

// ---------------------------------------------------------------------------
// fig3: NMSE versus transmit power

namespace {

struct BranchStats {
    std::vector<estim::NmseAccumulator> per_branch;
    estim::NmseAccumulator cascaded;
    std::vector<RunningMoments> entrywise;  // |e|^2 / |h|^2
    RunningMoments cascaded_entrywise;

    explicit BranchStats(int branches) : per_branch(std::size_t(branches)), entrywise(std::size_t(branches)) {}

    void add(const estim::BranchLayout& layout, std::span<const cplx> est, std::span<const cplx> truth) {
        for (std::size_t i = 0; i < est.size(); ++i) {
            const int b = layout.branch_of(i);
            per_branch[std::size_t(b)].add(est[i], truth[i]);
            const double ratio = std::norm(est[i] - truth[i]) / std::norm(truth[i]);
            entrywise[std::size_t(b)].add(ratio);
            if (!layout.is_direct(b)) {
                cascaded.add(est[i], truth[i]);
                cascaded_entrywise.add(ratio);
            }
        }
    }
};

}  // namespace

ExperimentOutput run_fig3(const ExperimentConfig& config) {
    config.validate();
    const auto power_db = linear_grid(config.sweep.power_db_start, config.sweep.power_db_stop, config.sweep.power_db_step);
    const int M = config.plan.M;
    const int S = config.plan.S;
    const estim::BranchLayout layout{M, config.plan.V * config.plan.S};
    const int B = layout.branch_count();
    const std::size_t trials = config.trials;
    const cplx pilot{1.0, 0.0};
    const estim::BranchPriors priors;

    // Infinite-path channels, one draw per trial, reused at every power.
    const auto plan = make_plan(config);
    const auto draw = make_draw(config);
    std::vector<std::vector<cplx>> channels(trials);
    parallel_for(
        trials,
        [&](std::size_t t) { channels[t] = stochchan::draw_channel_set(plan, M, TrialStream{config.seed, t}, draw).stacked(); },
        config.threads);

    // Deterministic geometric channel.
    const auto geo = geomchan::assemble_two_path_channels(make_geometry(config), make_pathloss(config), plan).stacked();
    const std::uint64_t geo_seed = derive_seed(config.seed, {tag(StreamTag::scene)});

    struct PowerResult {
        BranchStats inf_ls, inf_mmse, geo_ls;
        PowerResult(int b) : inf_ls(b), inf_mmse(b), geo_ls(b) {}
    };
    std::vector<PowerResult> results(power_db.size(), PowerResult(B));
    parallel_for(
        power_db.size(),
        [&](std::size_t j) {
            const double p = from_db10(power_db[j]);
            auto& r = results[j];
            for (std::size_t t = 0; t < trials; ++t) {
                Engine noise = TrialStream{config.seed, t}.engine(StreamTag::noise, j);
                const auto obs = estim::observe(channels[t], pilot, p, noise);
                r.inf_ls.add(layout, estim::ls_estimate(obs, layout, priors).estimate, channels[t]);
                r.inf_mmse.add(layout, estim::mmse_estimate(obs, layout, priors).estimate, channels[t]);

                Engine geo_noise = TrialStream{geo_seed, t}.engine(StreamTag::noise, j);
                const auto geo_obs = estim::observe(geo, pilot, p, geo_noise);
                r.geo_ls.add(layout, estim::ls_estimate(geo_obs, layout, priors).estimate, geo);
            }
        },
        config.threads);

    // Per-branch energy of the geometric channel, for its LS theory curve.
    std::vector<double> geo_energy(std::size_t(B), 0.0);
    double geo_cascaded_energy = 0.0;
    for (std::size_t i = 0; i < geo.size(); ++i) {
        geo_energy[std::size_t(layout.branch_of(i))] += std::norm(geo[i]);
        if (!layout.is_direct(layout.branch_of(i))) geo_cascaded_energy += std::norm(geo[i]);
    }
    const double cascaded_entries = double(geo.size()) - double(M);

    ExperimentOutput out;
    out.table.columns = {"model", "branch", "estimator", "p_db", "nmse", "nmse_entrywise", "nmse_theory", "error_variance"};
    auto emit = [&](const std::string& model, const std::string& estimator, auto select, auto theory, bool entrywise) {
        for (int b = 0; b <= B; ++b) {
            const bool pooled = b == B;
            if (pooled && B == 1) continue;
            const std::string branch = pooled ? "cascaded" : layout.branch_name(b, S);
            for (std::size_t j = 0; j < power_db.size(); ++j) {
                const BranchStats& st = select(results[j]);
                const auto& acc = pooled ? st.cascaded : st.per_branch[std::size_t(b)];
                const auto& ew = pooled ? st.cascaded_entrywise : st.entrywise[std::size_t(b)];
                out.table.rows.push_back({model, branch, estimator, format_double(power_db[j]), format_double(acc.value()),
                                          entrywise ? format_double(ew.mean()) : std::string(),
                                          format_double(theory(b, pooled, from_db10(power_db[j]))),
                                          format_double(acc.mean_error_power())});
            }
        }
    };
    emit("two_path", "ls", [](const PowerResult& r) -> const BranchStats& { return r.geo_ls; },
         [&](int b, bool pooled, double p) {
             return pooled ? cascaded_entries / (p * geo_cascaded_energy) : double(M) / (p * geo_energy[std::size_t(b)]);
         },
         true);
    emit("infinite_path", "ls", [](const PowerResult& r) -> const BranchStats& { return r.inf_ls; },
         [&](int b, bool pooled, double p) { return 1.0 / (p * (pooled ? priors.cascaded : priors.of(layout, b))); },
         false);
    emit("infinite_path", "mmse", [](const PowerResult& r) -> const BranchStats& { return r.inf_mmse; },
         [&](int b, bool pooled, double p) { return 1.0 / (1.0 + p * (pooled ? priors.cascaded : priors.of(layout, b))); },
         false);

    out.summary = {{"trials", trials}, {"M", M}, {"V", config.plan.V}, {"S", S}, {"power_points", power_db.size()}};
    return out;
}

// ---------------------------------------------------------------------------
// fig4a: condition number of the reflected-channel correlation matrix

ExperimentOutput run_fig4a(const ExperimentConfig& config) {
    config.validate();
    ExperimentOutput out;
    out.table.columns = {"i", "sv", "model", "cond_db", "clipped_eigenvalues"};
    const auto grid = linear_grid(config.sweep.i_start, config.sweep.i_stop, config.sweep.i_step);
    nlohmann::json integer_max = nlohmann::json::object();
    for (int n : config.sweep.grid_sizes) {
        for (const auto& model_name : config.sweep.models) {
            const auto model = stochchan::correlation_model_from_string(model_name);
            double worst_integer = 0.0;
            for (double i : grid) {
                const auto plan = make_plan(config, n, n, i);
                const auto F = stochchan::build_correlation_matrix(plan, model);
                const double cond = stochchan::condition_number_db(F.F);
                if (i == std::round(i)) worst_integer = std::max(worst_integer, cond);
                out.table.rows.push_back({format_double(i), std::to_string(n * n), model_name, format_double(cond),
                                          std::to_string(F.clipped_eigenvalues)});
            }
            integer_max[model_name + "_sv" + std::to_string(n * n)] = worst_integer;
        }
    }
    out.summary = {{"max_cond_db_at_integer_i", integer_max}};
    return out;
}

// ---------------------------------------------------------------------------
// fig4b: achievable rate, Jensen bound and MIMO benchmark

ExperimentOutput run_fig4b(const ExperimentConfig& config) {
    config.validate();
    const auto plan = make_plan(config);
    const auto power_db = linear_grid(config.sweep.power_db_start, config.sweep.power_db_stop, config.sweep.power_db_step);
    const rate::MonteCarloOptions opt{config.trials, config.seed, make_draw(config), config.threads};
    const auto curve = rate::rate_curve(plan, config.plan.M, power_db, opt);

    ExperimentOutput out;
    out.table.columns = {"p_db", "p_linear", "rate_mc", "rate_mc_se", "rate_bound", "rate_mimo", "rate_mimo_se"};
    double max_gap = 0.0;
    for (const auto& pt : curve.points) {
        max_gap = std::max(max_gap, pt.bound - pt.fmx.mean);
        out.table.rows.push_back({format_double(pt.power_db), format_double(pt.power), format_double(pt.fmx.mean),
                                  format_double(pt.fmx.standard_error), format_double(pt.bound),
                                  format_double(pt.mimo.mean), format_double(pt.mimo.standard_error)});
    }
    out.summary = {
        {"mean_energy", curve.energy.mean()},
        {"mean_energy_se", curve.energy.standard_error()},
        {"expected_energy", rate::expected_energy(config.plan.M, config.plan.S, config.plan.V)},
        {"max_bound_gap_bits", max_gap},
    };
    return out;
}

// ---------------------------------------------------------------------------
// validate: quick end-to-end sanity checks

ExperimentOutput run_validate(const ExperimentConfig& config) {
    config.validate();
    ExperimentOutput out;
    out.table.columns = {"check", "value", "threshold", "pass"};
    bool all = true;
    auto check = [&](const std::string& name, double value, double threshold) {
        const bool ok = value <= threshold;
        all = all && ok;
        out.table.rows.push_back({name, format_double(value), format_double(threshold), ok ? "1" : "0"});
    };

    // Waveform decoupling against closed form.
    const sigcore::NormalizedUnits units{config.signal.carrier, config.signal.sample_rate};
    double worst = 0.0;
    for (int n = 0; n < config.signal.scenes; ++n) {
        Engine rng = make_engine(config.seed, {tag(StreamTag::scene), std::uint64_t(n)});
        auto scene = sigcore::random_two_path_scene(rng, 1 + n % 2, units, std::min(256, (config.signal.carrier - 1) / 2));
        scene.filter_taps = config.signal.filter_taps;
        const cplx x = std::polar(1.0, kTwoPi * std::uniform_real_distribution<double>(0.0, 1.0)(rng));
        const auto sim = sigcore::simulate_link(scene, x);
        const auto ref = sigcore::closed_form_readout(scene, x);
        for (const auto& [f, v] : ref.entries()) worst = std::max(worst, std::abs(sim.at(f) - v) / std::abs(v));
    }
    check("decoupling_max_relative_error", worst, 1e-3);

    double rho_zero = 0.0;
    for (int i = 1; i <= 64; ++i) rho_zero = std::max(rho_zero, stochchan::rho(i / (2.0 * config.plan.max_delay), config.plan.max_delay));
    check("rho_at_integer_spacing_max", rho_zero, 1e-12);

    double cond = 0.0;
    for (int n : config.sweep.grid_sizes)
        for (int i = 1; i <= 3; ++i)
            cond = std::max(cond, stochchan::condition_number_db(
                                      stochchan::build_correlation_matrix(make_plan(config, n, n, i), stochchan::CorrelationModel::pair_only).F));
    check("pair_only_cond_db_at_integer_i_max", cond, 0.01);

    const auto plan = make_plan(config);
    const rate::MonteCarloOptions opt{config.trials, config.seed, make_draw(config), config.threads};
    const auto power_db = linear_grid(config.sweep.power_db_start, config.sweep.power_db_stop, config.sweep.power_db_step);
    const auto curve = rate::rate_curve(plan, config.plan.M, power_db, opt);
    const double expected = rate::expected_energy(config.plan.M, config.plan.S, config.plan.V);
    check("energy_relative_error", std::abs(curve.energy.mean() - expected) / expected,
          4.0 * curve.energy.standard_error() / expected + 1e-12);
    double jensen = -std::numeric_limits<double>::infinity();
    for (const auto& pt : curve.points)
        jensen = std::max(jensen, (pt.fmx.mean - pt.bound) / std::max(pt.fmx.standard_error, 1e-300));
    check("jensen_excess_in_standard_errors", jensen, 3.0);

    out.summary = {{"all_pass", all}};
    return out;
}

ExperimentOutput run_experiment(const ExperimentConfig& config) {
    switch (config.id) {
        case ExperimentId::fig2: return run_fig2(config);
        case ExperimentId::fig3: return run_fig3(config);
        case ExperimentId::fig4a: return run_fig4a(config);
        case ExperimentId::fig4b: return run_fig4b(config);
        case ExperimentId::validate: return run_validate(config);
    }
    throw ConfigError("experiment.id", "unknown experiment");
}

RunResult run(const ExperimentConfig& config) {
    const auto started = std::chrono::steady_clock::now();
    ExperimentOutput output = run_experiment(config);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

    const std::filesystem::path dir(config.output_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory " + dir.string() + ": " + ec.message());

    RunResult result;
    const std::string name = to_string(config.id);
    result.csv = dir / (name + ".csv");
    result.manifest = dir / (name + ".manifest.json");
    result.summary = output.summary;

    auto write = [](const std::filesystem::path& path, const std::string& text) {
        std::ofstream f(path, std::ios::binary);
        if (!f) throw std::runtime_error("cannot write " + path.string());
        f << text;
        if (!f) throw std::runtime_error("write failed for " + path.string());
    };
    write(result.csv, output.table.to_csv());

    const std::string ini = to_ini(config);
    const nlohmann::json manifest = {
        {"experiment", name},
        {"config_format", kConfigFormat},
        {"config", ini},
        {"config_sha256", sha256_hex(ini)},
        {"seed", config.seed},
        {"trials", config.trials},
        {"code_version", kVersion},
        {"wall_time_s", wall},
        {"csv", result.csv.filename().string()},
        {"columns", output.table.columns},
        {"rows", output.table.rows.size()},
        {"summary", output.summary},
    };
    write(result.manifest, manifest.dump(2) + "\n");
    return result;
}

}  // namespace fmx::experiment
