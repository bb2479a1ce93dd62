#include "fmx/estim.hpp"

#include <cmath>

#include "fmx/errors.hpp"

namespace fmx::estim {

std::string BranchLayout::branch_name(int branch, int S) const {
    if (branch == 0) return "direct";
    const int k = (branch - 1) / 2;
    const int v = S > 0 ? k / S + 1 : 1;
    const int s = S > 0 ? k % S + 1 : k + 1;
    return std::string((branch - 1) % 2 == 0 ? "plus_" : "minus_") + std::to_string(v) + "_" + std::to_string(s);
}

void Observation::validate() const {
    if (!(power > 0.0)) throw DomainError("transmit power must be positive");
    if (std::abs(std::abs(pilot) - 1.0) > 1e-9) throw DomainError("pilot must have unit modulus");
}

Observation observe(std::span<const cplx> h_all, cplx pilot, double power, Engine& noise) {
    Observation obs;
    obs.pilot = pilot;
    obs.power = power;
    obs.validate();
    const double amp = std::sqrt(power);
    obs.y.resize(h_all.size());
    for (std::size_t i = 0; i < h_all.size(); ++i) obs.y[i] = amp * h_all[i] * pilot + complex_normal(noise);
    return obs;
}

namespace {

void check_layout(const Observation& obs, const BranchLayout& layout) {
    obs.validate();
    if (obs.y.size() != layout.size()) throw PreconditionError("observation length does not match branch layout");
}

}  // namespace

EstimationReport ls_estimate(const Observation& obs, const BranchLayout& layout, const BranchPriors& priors) {
    check_layout(obs, layout);
    EstimationReport r;
    const cplx scale = std::conj(obs.pilot) / std::sqrt(obs.power);
    r.estimate.resize(obs.y.size());
    for (std::size_t i = 0; i < obs.y.size(); ++i) r.estimate[i] = scale * obs.y[i];
    for (int b = 0; b < layout.branch_count(); ++b) {
        const double s2 = priors.of(layout, b);
        r.error_variance_theory.push_back(1.0 / obs.power);
        r.nmse_theory.push_back(1.0 / (obs.power * s2));
    }
    return r;
}

EstimationReport mmse_estimate(const Observation& obs, const BranchLayout& layout, const BranchPriors& priors) {
    check_layout(obs, layout);
    if (!(priors.direct > 0.0) || !(priors.cascaded > 0.0)) throw DomainError("prior variances must be positive");
    EstimationReport r;
    const double p = obs.power;
    r.estimate.resize(obs.y.size());
    for (std::size_t i = 0; i < obs.y.size(); ++i) {
        const double s2 = priors.of(layout, layout.branch_of(i));
        r.estimate[i] = (s2 * std::sqrt(p) / (p * s2 + 1.0)) * std::conj(obs.pilot) * obs.y[i];
    }
    for (int b = 0; b < layout.branch_count(); ++b) {
        const double s2 = priors.of(layout, b);
        r.error_variance_theory.push_back(s2 / (1.0 + p * s2));
        r.nmse_theory.push_back(1.0 / (1.0 + p * s2));
    }
    return r;
}

void EstimationReport::attach_truth(const BranchLayout& layout, std::span<const cplx> truth) {
    if (truth.size() != estimate.size()) throw PreconditionError("truth length does not match estimate");
    const std::size_t M = std::size_t(layout.M);
    nmse.clear();
    for (int b = 0; b < layout.branch_count(); ++b) {
        const std::size_t off = std::size_t(b) * M;
        nmse.push_back(fmx::estim::nmse(std::span(estimate).subspan(off, M), truth.subspan(off, M)));
    }
}

void NmseAccumulator::add(std::span<const cplx> estimate, std::span<const cplx> truth) {
    if (estimate.size() != truth.size()) throw PreconditionError("estimate and truth differ in length");
    for (std::size_t i = 0; i < estimate.size(); ++i) add(estimate[i], truth[i]);
}

void NmseAccumulator::add(cplx estimate, cplx truth) {
    err_.add(std::norm(estimate - truth));
    ref_.add(std::norm(truth));
    ++count_;
}

double NmseAccumulator::value() const {
    if (!(ref_.value() > 0.0)) throw DomainError("NMSE undefined for zero-energy truth");
    return err_.value() / ref_.value();
}

double nmse(std::span<const cplx> estimate, std::span<const cplx> truth) {
    NmseAccumulator acc;
    acc.add(estimate, truth);
    return acc.value();
}

}  // namespace fmx::estim
