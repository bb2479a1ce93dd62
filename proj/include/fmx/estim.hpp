#pragma once

// One-pilot channel estimation on the frequency-stacked observation
// y = sqrt(p) h_all x + n. Every branch (direct, and each FRM's + and -
// image) occupies its own frequency bin, so each is estimated from its own
// slice of y alone.

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fmx/numeric.hpp"
#include "fmx/random.hpp"

namespace fmx::estim {

using cplx = std::complex<double>;

// Block layout of h_all: [direct, +1, -1, ..., +K, -K], M entries each.
struct BranchLayout {
    int M = 1;
    int frm_count = 0;

    int branch_count() const { return 2 * frm_count + 1; }
    std::size_t size() const { return std::size_t(branch_count()) * std::size_t(M); }
    int branch_of(std::size_t index) const { return int(index / std::size_t(M)); }
    bool is_direct(int branch) const { return branch == 0; }
    // "direct", "plus_v_s", "minus_v_s" given the FRM grid width S.
    std::string branch_name(int branch, int S) const;
};

struct Observation {
    std::vector<cplx> y;
    cplx pilot{1.0, 0.0};
    double power = 1.0;  // p, linear

    void validate() const;
};

// y = sqrt(p) h x + n with n ~ CN(0, I) drawn from `noise`.
Observation observe(std::span<const cplx> h_all, cplx pilot, double power, Engine& noise);

// Prior variance per branch: 1 on the direct branch, 1/4 on cascades.
struct BranchPriors {
    double direct = 1.0;
    double cascaded = 0.25;

    double of(const BranchLayout& layout, int branch) const { return layout.is_direct(branch) ? direct : cascaded; }
};

struct EstimationReport {
    std::vector<cplx> estimate;
    // Per-branch NMSE against the truth, filled by attach_truth.
    std::vector<double> nmse;
    // Theoretical NMSE per branch (LS: 1 / (p sigma^2); MMSE: 1 / (1 + p sigma^2)).
    std::vector<double> nmse_theory;
    // Theoretical error variance per branch (LS: 1/p; MMSE: sigma^2 / (1 + p sigma^2)).
    std::vector<double> error_variance_theory;

    void attach_truth(const BranchLayout& layout, std::span<const cplx> truth);
};

// h_hat = x^* y / sqrt(p).
EstimationReport ls_estimate(const Observation& obs, const BranchLayout& layout,
                             const BranchPriors& priors = {});

// Per entry: sigma^2 sqrt(p) x^* y / (p sigma^2 + 1), sigma^2 the branch prior.
EstimationReport mmse_estimate(const Observation& obs, const BranchLayout& layout,
                               const BranchPriors& priors = {});

// Accumulates sum |h_hat - h|^2 and sum |h|^2 over trials.
class NmseAccumulator {
public:
    void add(std::span<const cplx> estimate, std::span<const cplx> truth);
    void add(cplx estimate, cplx truth);
    double error_energy() const { return err_.value(); }
    double truth_energy() const { return ref_.value(); }
    std::size_t count() const { return count_; }
    double mean_error_power() const { return count_ ? err_.value() / double(count_) : 0.0; }
    double value() const;  // throws DomainError on zero truth energy

private:
    CompensatedSum err_;
    CompensatedSum ref_;
    std::size_t count_ = 0;
};

// Single-shot NMSE, sum |e|^2 / sum |h|^2.
double nmse(std::span<const cplx> estimate, std::span<const cplx> truth);

}  // namespace fmx::estim
