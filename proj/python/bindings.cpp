#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "fmx/errors.hpp"
#include "fmx/estim.hpp"
#include "fmx/experiment.hpp"
#include "fmx/geomchan.hpp"
#include "fmx/rate.hpp"
#include "fmx/sigcore.hpp"
#include "fmx/stochchan.hpp"
#include "fmx/version.hpp"

namespace py = pybind11;
using namespace fmx;

namespace {

py::object to_python(const nlohmann::json& j) {
    return py::module_::import("json").attr("loads")(j.dump());
}

py::dict readout_dict(const sigcore::ToneReadout& r) {
    py::dict d;
    for (const auto& [f, v] : r.entries()) d[py::float_(f)] = v;
    return d;
}

}  // namespace

PYBIND11_MODULE(_fmx, m) {
    m.doc() = "Link-level simulator for frequency-mixing reflective surfaces";
    m.attr("__version__") = kVersion;

    auto config_error = py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<PreconditionError>(m, "PreconditionError", PyExc_ValueError);
    (void)config_error;

    // sigcore
    py::class_<sigcore::SinglePathLink>(m, "SinglePathLink")
        .def(py::init([](double gain, double delay) { return sigcore::SinglePathLink{gain, delay}; }),
             py::arg("gain") = 1.0, py::arg("delay") = 0.0)
        .def_readwrite("gain", &sigcore::SinglePathLink::gain)
        .def_readwrite("delay", &sigcore::SinglePathLink::delay);

    py::class_<sigcore::Reflector>(m, "Reflector")
        .def(py::init([](sigcore::SinglePathLink a, sigcore::SinglePathLink b, int f) {
                 return sigcore::Reflector{a, b, f};
             }),
             py::arg("user_to_frm"), py::arg("frm_to_bs"), py::arg("mixing_frequency"))
        .def_readwrite("user_to_frm", &sigcore::Reflector::user_to_frm)
        .def_readwrite("frm_to_bs", &sigcore::Reflector::frm_to_bs)
        .def_readwrite("mixing_frequency", &sigcore::Reflector::mixing_frequency);

    py::class_<sigcore::TwoPathScene>(m, "TwoPathScene")
        .def(py::init([](sigcore::SinglePathLink direct, std::vector<sigcore::Reflector> reflectors, int carrier,
                         int sample_rate, int filter_taps) {
                 sigcore::TwoPathScene s;
                 s.direct = direct;
                 s.reflectors = std::move(reflectors);
                 s.units = {carrier, sample_rate};
                 s.filter_taps = filter_taps;
                 return s;
             }),
             py::arg("direct"), py::arg("reflectors"), py::arg("carrier") = 1024, py::arg("sample_rate") = 8192,
             py::arg("filter_taps") = sigcore::kDefaultFilterTaps)
        .def_readwrite("direct", &sigcore::TwoPathScene::direct)
        .def_readwrite("reflectors", &sigcore::TwoPathScene::reflectors)
        .def("validate", &sigcore::TwoPathScene::validate);

    m.def("simulate_link", [](const sigcore::TwoPathScene& s, std::complex<double> x) {
        return readout_dict(sigcore::simulate_link(s, x));
    }, py::arg("scene"), py::arg("x"), "Waveform-level link: returns {offset: complex readout}.");
    m.def("closed_form_readout", [](const sigcore::TwoPathScene& s, std::complex<double> x) {
        return readout_dict(sigcore::closed_form_readout(s, x));
    }, py::arg("scene"), py::arg("x"));
    m.def("design_lowpass", &sigcore::design_lowpass, py::arg("taps"), py::arg("cutoff"), py::arg("sample_rate"));

    // stochchan
    py::class_<stochchan::FrequencyPlan>(m, "FrequencyPlan")
        .def_static("with_normalized_spacing", &stochchan::FrequencyPlan::with_normalized_spacing, py::arg("i"),
                    py::arg("V") = 2, py::arg("S") = 2, py::arg("max_delay") = 1e-6, py::arg("carrier") = 3.0e9)
        .def_readwrite("carrier", &stochchan::FrequencyPlan::carrier)
        .def_readwrite("V", &stochchan::FrequencyPlan::V)
        .def_readwrite("S", &stochchan::FrequencyPlan::S)
        .def_readwrite("spacing", &stochchan::FrequencyPlan::spacing)
        .def_readwrite("max_delay", &stochchan::FrequencyPlan::max_delay)
        .def_property_readonly("coherence_spacing", &stochchan::FrequencyPlan::coherence_spacing)
        .def("mixing_frequency", py::overload_cast<int, int>(&stochchan::FrequencyPlan::mixing_frequency, py::const_));

    m.def("phasor_moments", [](double a, double D) {
        const auto r = stochchan::phasor_moments(a, D);
        return py::make_tuple(r.m_cos, r.m_sin, r.m_cos2, r.m_sin2);
    }, py::arg("a"), py::arg("D"), "(E cos, E sin, E cos^2, E sin^2) of 2 pi a tau, tau ~ U[0, D].");
    m.def("rho", &stochchan::rho, py::arg("f_r"), py::arg("tau_max"));
    m.def("rho_complex", &stochchan::rho_complex, py::arg("delta_f"), py::arg("tau_max"));
    m.def("draw_channels", [](const stochchan::FrequencyPlan& plan, int M, std::uint64_t seed, std::uint64_t trial, int L) {
        return stochchan::draw_channel_set(plan, M, TrialStream{seed, trial}, {L}).stacked();
    }, py::arg("plan"), py::arg("M"), py::arg("seed"), py::arg("trial") = 0, py::arg("L") = 256,
       "Stacked h_all = [h_d, z+_1, z-_1, ...] for one trial.");
    m.def("correlation_matrix", [](const stochchan::FrequencyPlan& plan, const std::string& model) {
        return stochchan::build_correlation_matrix(plan, stochchan::correlation_model_from_string(model)).F;
    }, py::arg("plan"), py::arg("model") = "pair_only");
    m.def("condition_number_db", &stochchan::condition_number_db, py::arg("F"));

    // geomchan
    m.def("two_path_channels", [](const experiment::ExperimentConfig& c) {
        experiment::ExperimentConfig cfg = c;
        cfg.validate();
        geomchan::SceneGeometry g;
        const auto& gb = cfg.geometry;
        g.user = {gb.user[0], gb.user[1], gb.user[2]};
        g.bs_first = {gb.bs_first[0], gb.bs_first[1], gb.bs_first[2]};
        g.frm_first = {gb.frm_first[0], gb.frm_first[1], gb.frm_first[2]};
        g.bs_spacing = gb.bs_spacing;
        g.frm_spacing = gb.frm_spacing;
        g.M = cfg.plan.M;
        g.V = cfg.plan.V;
        g.S = cfg.plan.S;
        geomchan::PathlossModel pl;
        pl.reference_distance = gb.reference_distance;
        pl.exponent = gb.pathloss_exponent;
        pl.light_speed = gb.light_speed;
        if (gb.pathloss_interpretation == "power") pl.interpretation = geomchan::PathlossInterpretation::power;
        const auto plan = stochchan::FrequencyPlan::with_normalized_spacing(cfg.plan.normalized_spacing, g.V, g.S,
                                                                            cfg.plan.max_delay, cfg.plan.carrier);
        return geomchan::assemble_two_path_channels(g, pl, plan).stacked();
    }, py::arg("config"), "Stacked deterministic channel for the config's geometry.");

    // estim
    m.def("estimate", [](const std::vector<std::complex<double>>& h, double power, int M, int frm_count,
                         const std::string& estimator, std::uint64_t seed) {
        Engine noise = make_engine(seed, {tag(StreamTag::noise)});
        const auto obs = estim::observe(h, {1.0, 0.0}, power, noise);
        const estim::BranchLayout layout{M, frm_count};
        if (estimator == "ls") return estim::ls_estimate(obs, layout).estimate;
        if (estimator == "mmse") return estim::mmse_estimate(obs, layout).estimate;
        throw ConfigError("estimator", "expected 'ls' or 'mmse'");
    }, py::arg("h"), py::arg("power"), py::arg("M"), py::arg("frm_count"), py::arg("estimator") = "ls",
       py::arg("seed") = 1);
    m.def("nmse", [](const std::vector<std::complex<double>>& e, const std::vector<std::complex<double>>& h) {
        return estim::nmse(e, h);
    });

    // rate
    m.def("rate_mc", [](const stochchan::FrequencyPlan& plan, int M, double power, std::size_t trials, std::uint64_t seed) {
        const auto r = rate::rate_mc(plan, M, power, {trials, seed});
        return py::make_tuple(r.mean, r.standard_error);
    }, py::arg("plan"), py::arg("M"), py::arg("power"), py::arg("trials") = 10000, py::arg("seed") = 1,
       "(mean, standard error) of log2(1 + p |h_all|^2).");
    m.def("rate_upper_bound", &rate::rate_upper_bound, py::arg("M"), py::arg("S"), py::arg("V"), py::arg("power"));
    m.def("mimo_baseline", [](int M, double power, std::size_t trials, std::uint64_t seed) {
        const auto r = rate::mimo_baseline(M, power, {trials, seed});
        return py::make_tuple(r.mean, r.standard_error);
    }, py::arg("M"), py::arg("power"), py::arg("trials") = 10000, py::arg("seed") = 1);

    // experiments
    py::class_<experiment::ExperimentConfig>(m, "ExperimentConfig")
        .def_readwrite("trials", &experiment::ExperimentConfig::trials)
        .def_readwrite("seed", &experiment::ExperimentConfig::seed)
        .def_readwrite("output_dir", &experiment::ExperimentConfig::output_dir)
        .def_readwrite("threads", &experiment::ExperimentConfig::threads)
        .def_property_readonly("id", [](const experiment::ExperimentConfig& c) { return experiment::to_string(c.id); })
        .def("to_ini", [](const experiment::ExperimentConfig& c) { return experiment::to_ini(c); })
        .def("__eq__", [](const experiment::ExperimentConfig& a, const experiment::ExperimentConfig& b) { return a == b; });

    m.def("default_config", [](const std::string& id) {
        return experiment::ExperimentConfig::defaults(experiment::experiment_from_string(id));
    }, py::arg("experiment"));
    m.def("parse_config", [](const std::string& text, const std::string& fallback) {
        return experiment::parse_config(text, experiment::experiment_from_string(fallback));
    }, py::arg("text"), py::arg("fallback") = "fig4b");
    m.def("run_experiment", [](const experiment::ExperimentConfig& c) {
        experiment::ExperimentOutput out;
        {
            py::gil_scoped_release release;
            out = experiment::run_experiment(c);
        }
        return py::make_tuple(out.table.to_csv(), to_python(out.summary));
    }, py::arg("config"), "Runs in memory; returns (csv_text, summary).");
    m.def("run", [](const experiment::ExperimentConfig& c) {
        experiment::RunResult r;
        {
            py::gil_scoped_release release;
            r = experiment::run(c);
        }
        return py::make_tuple(r.csv, r.manifest, to_python(r.summary));
    }, py::arg("config"), "Runs and writes CSV plus manifest; returns (csv_path, manifest_path, summary).");
}
