#include "fmx/stochchan.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "fmx/errors.hpp"
#include "fmx/numeric.hpp"

namespace fmx::stochchan {

FrequencyPlan FrequencyPlan::with_normalized_spacing(double i, int V, int S, double max_delay, double carrier) {
    FrequencyPlan p;
    p.carrier = carrier;
    p.V = V;
    p.S = S;
    p.max_delay = max_delay;
    p.spacing = i * p.coherence_spacing();
    return p;
}

void FrequencyPlan::validate() const {
    if (!(carrier > 0.0)) throw ConfigError("carrier", "must be positive");
    if (V < 0 || S < 0) throw ConfigError("V/S", "must be non-negative");
    if (!(max_delay > 0.0)) throw ConfigError("max_delay", "must be positive");
    if (!(bandwidth >= 0.0)) throw ConfigError("bandwidth", "must be non-negative");
    if (frm_count() > 0) {
        if (!(spacing > bandwidth)) throw ConfigError("spacing", "must exceed the signal bandwidth");
        if (mixing_frequency(frm_count() - 1) >= carrier)
            throw ConfigError("spacing", "largest mixing frequency must stay below the carrier");
    }
}

PhasorMoments phasor_moments(double a, double D) {
    const double x = kTwoPi * a * D;
    if (x == 0.0) return {1.0, 0.0, 1.0, 0.0};
    const double s = std::sin(0.5 * x);
    const double q = std::sin(2.0 * x) / (4.0 * x);
    // (1 - cos x) / x written as 2 sin^2(x/2) / x to avoid cancellation.
    return {std::sin(x) / x, 2.0 * s * s / x, 0.5 + q, 0.5 - q};
}

cplx rho_complex(double delta_f, double tau_max) {
    if (!(tau_max > 0.0)) throw DomainError("tau_max must be positive");
    const PhasorMoments m = phasor_moments(delta_f, tau_max);
    return {m.m_cos, -m.m_sin};
}

double rho(double f_r, double tau_max) {
    if (!(tau_max > 0.0)) throw DomainError("tau_max must be positive");
    const double x = 4.0 * kPi * f_r * tau_max;
    if (x == 0.0) return 1.0;
    return std::sqrt(2.0 - 2.0 * std::cos(x)) / std::abs(x);
}

PathSet draw_path_set(int L, double tau_max, Engine& rng, AmplitudeLaw law) {
    if (L < 1) throw ConfigError("L", "path count must be >= 1");
    if (!(tau_max > 0.0)) throw ConfigError("max_delay", "must be positive");
    PathSet p;
    p.amplitudes.resize(std::size_t(L));
    p.delays.resize(std::size_t(L));
    const double scale = 1.0 / std::sqrt(double(L));
    std::uniform_real_distribution<double> delay(0.0, tau_max);
    std::exponential_distribution<double> power(1.0);
    for (std::size_t l = 0; l < std::size_t(L); ++l) {
        p.delays[l] = delay(rng);
        p.amplitudes[l] = law == AmplitudeLaw::rayleigh ? std::sqrt(power(rng)) * scale : scale;
    }
    return p;
}

cplx evaluate_at_shift(const PathSet& paths, double carrier, double shift) {
    const double f = carrier + shift;
    cplx acc{0.0, 0.0};
    for (std::size_t l = 0; l < paths.size(); ++l)
        acc += std::polar(paths.amplitudes[l], -kTwoPi * frac(f * paths.delays[l]));
    return acc;
}

std::pair<cplx, cplx> evaluate_pair(const PathSet& paths, double carrier, double shift) {
    cplx plus{0.0, 0.0}, minus{0.0, 0.0};
    for (std::size_t l = 0; l < paths.size(); ++l) {
        const double tau = paths.delays[l];
        const cplx base = std::polar(paths.amplitudes[l], -kTwoPi * frac(carrier * tau));
        const cplx rot = std::polar(1.0, -kTwoPi * frac(shift * tau));
        plus += base * rot;
        minus += base * std::conj(rot);
    }
    return {plus, minus};
}

std::vector<cplx> ChannelSet::stacked() const {
    std::vector<cplx> out;
    out.reserve(stacked_size());
    out.insert(out.end(), direct.begin(), direct.end());
    for (int k = 0; k < frm_count; ++k) {
        out.insert(out.end(), z_plus[std::size_t(k)].begin(), z_plus[std::size_t(k)].end());
        out.insert(out.end(), z_minus[std::size_t(k)].begin(), z_minus[std::size_t(k)].end());
    }
    return out;
}

double ChannelSet::energy() const {
    CompensatedSum acc;
    for (const cplx& v : direct) acc.add(std::norm(v));
    for (int k = 0; k < frm_count; ++k)
        for (int m = 0; m < M; ++m) {
            acc.add(std::norm(z_plus[std::size_t(k)][std::size_t(m)]));
            acc.add(std::norm(z_minus[std::size_t(k)][std::size_t(m)]));
        }
    return acc.value();
}

void ChannelSet::recompute_cascade() {
    z_plus.assign(std::size_t(frm_count), std::vector<cplx>(std::size_t(M)));
    z_minus.assign(std::size_t(frm_count), std::vector<cplx>(std::size_t(M)));
    for (std::size_t k = 0; k < std::size_t(frm_count); ++k)
        for (std::size_t m = 0; m < std::size_t(M); ++m) {
            z_plus[k][m] = 0.5 * user_to_frm[k] * g_plus[k][m];
            z_minus[k][m] = 0.5 * user_to_frm[k] * g_minus[k][m];
        }
}

std::vector<cplx> draw_direct_channel(int M, const TrialStream& stream) {
    Engine rng = stream.engine(StreamTag::direct_channel);
    std::vector<cplx> h(static_cast<std::size_t>(M));
    for (auto& v : h) v = complex_normal(rng);
    return h;
}

ChannelSet draw_channel_set(const FrequencyPlan& plan, int M, const TrialStream& stream,
                            const ChannelDrawOptions& options) {
    plan.validate();
    if (M < 1) throw ConfigError("M", "antenna count must be >= 1");
    ChannelSet c;
    c.M = M;
    c.frm_count = plan.frm_count();
    c.direct = draw_direct_channel(M, stream);

    Engine user_rng = stream.engine(StreamTag::user_to_frm);
    c.user_to_frm.resize(std::size_t(c.frm_count));
    for (auto& v : c.user_to_frm) v = complex_normal(user_rng);

    c.g_plus.assign(std::size_t(c.frm_count), std::vector<cplx>(std::size_t(M)));
    c.g_minus.assign(std::size_t(c.frm_count), std::vector<cplx>(std::size_t(M)));
    for (int k = 0; k < c.frm_count; ++k) {
        const double f = plan.mixing_frequency(k);
        for (int m = 0; m < M; ++m) {
            Engine rng = stream.engine(StreamTag::frm_to_bs, std::uint64_t(k), std::uint64_t(m));
            const PathSet paths = draw_path_set(options.L, plan.max_delay, rng, options.law);
            const auto [gp, gm] = evaluate_pair(paths, plan.carrier, f);
            c.g_plus[std::size_t(k)][std::size_t(m)] = gp;
            c.g_minus[std::size_t(k)][std::size_t(m)] = gm;
        }
    }
    c.recompute_cascade();
    return c;
}

std::string to_string(CorrelationModel model) {
    return model == CorrelationModel::pair_only ? "pair_only" : "shared_scatterers";
}

CorrelationModel correlation_model_from_string(const std::string& name) {
    if (name == "pair_only") return CorrelationModel::pair_only;
    if (name == "shared_scatterers") return CorrelationModel::shared_scatterers;
    throw ConfigError("model", "unknown correlation model '" + name + "'");
}

CorrelationMatrix build_correlation_matrix(const FrequencyPlan& plan, CorrelationModel model) {
    plan.validate();
    const int K = plan.frm_count();
    const double tau = plan.max_delay;
    const Eigen::Index n = 2 * K;
    Eigen::MatrixXcd F = Eigen::MatrixXcd::Zero(n, n);

    if (model == CorrelationModel::pair_only) {
        for (int k = 0; k < K; ++k) {
            const cplx c = rho_complex(2.0 * plan.mixing_frequency(k), tau);
            F(2 * k, 2 * k) = 1.0;
            F(2 * k + 1, 2 * k + 1) = 1.0;
            F(2 * k, 2 * k + 1) = c;
            F(2 * k + 1, 2 * k) = std::conj(c);
        }
    } else {
        std::vector<double> shifts;
        for (int k = 0; k < K; ++k) {
            shifts.push_back(plan.mixing_frequency(k));
            shifts.push_back(-plan.mixing_frequency(k));
        }
        for (Eigen::Index a = 0; a < n; ++a)
            for (Eigen::Index b = 0; b < n; ++b)
                F(a, b) = a == b ? cplx{1.0, 0.0}
                                 : rho_complex(shifts[std::size_t(a)] - shifts[std::size_t(b)], tau);
    }

    int clipped = 0;
    if (n > 0) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(F);
        Eigen::VectorXd lambda = eig.eigenvalues();
        for (Eigen::Index i = 0; i < lambda.size(); ++i)
            if (lambda(i) < 0.0) {
                lambda(i) = 0.0;
                ++clipped;
            }
        if (clipped > 0) {
            F = eig.eigenvectors() * lambda.cast<cplx>().asDiagonal() * eig.eigenvectors().adjoint();
            // Restore the unit diagonal with a congruence, which keeps F PSD.
            Eigen::VectorXd d = F.diagonal().real().cwiseMax(std::numeric_limits<double>::min()).cwiseSqrt().cwiseInverse();
            F = d.cast<cplx>().asDiagonal() * F * d.cast<cplx>().asDiagonal();
            F = 0.5 * (F + F.adjoint()).eval();
            for (Eigen::Index i = 0; i < n; ++i) F(i, i) = 1.0;
        }
    }
    return {F, clipped};
}

double condition_number_db(const Eigen::MatrixXcd& F) {
    if (F.rows() != F.cols()) throw PreconditionError("condition number needs a square matrix");
    if (F.rows() == 0) throw PreconditionError("empty matrix");
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(F);
    const auto& sv = svd.singularValues();
    const double smax = sv.maxCoeff();
    const double smin = sv.minCoeff();
    if (!(smin > smax * std::numeric_limits<double>::epsilon())) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(smax / smin);
}

}  // namespace fmx::stochchan
