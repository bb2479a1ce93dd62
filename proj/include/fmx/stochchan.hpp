#pragma once

// Rich-scattering channel statistics for a frequency-mixing surface:
// moments of uniformly-delayed phasors, the correlation between the two
// mirror-image reflected channels, multipath channel generation and the
// reflected-channel correlation matrix.
//
// Frequencies are in Hz and delays in seconds.

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fmx/random.hpp"

namespace fmx::stochchan {

using cplx = std::complex<double>;

struct FrequencyPlan {
    double carrier = 3.0e9;
    int V = 2;
    int S = 2;
    double spacing = 5.0e5;    // f_n
    double max_delay = 1e-6;   // tau_max
    double bandwidth = 0.0;    // signal bandwidth B; spacing must exceed it

    double coherence_spacing() const { return 1.0 / (2.0 * max_delay); }  // delta_f
    double normalized_spacing() const { return spacing / coherence_spacing(); }
    int frm_count() const { return V * S; }
    // v, s are 1-based: f_{v,s} = ((v-1) S + s) f_n.
    double mixing_frequency(int v, int s) const { return double((v - 1) * S + s) * spacing; }
    // Same, by 0-based FRM index k = (v-1) S + (s-1).
    double mixing_frequency(int k) const { return double(k + 1) * spacing; }

    // Plan with f_n = i * delta_f.
    static FrequencyPlan with_normalized_spacing(double i, int V, int S, double max_delay = 1e-6,
                                                 double carrier = 3.0e9);

    void validate() const;
};

struct PhasorMoments {
    double m_cos;   // E{cos(2 pi a tau)}
    double m_sin;   // E{sin(2 pi a tau)}
    double m_cos2;  // E{cos^2(2 pi a tau)}
    double m_sin2;  // E{sin^2(2 pi a tau)}
};

// Moments for tau ~ U[0, D]; a D = 0 returns the limits {1, 0, 1, 0}.
PhasorMoments phasor_moments(double a, double D);

// E{e^{-j 2 pi delta_f tau}}, tau ~ U[0, tau_max].
cplx rho_complex(double delta_f, double tau_max);

// |E{g_+ g_-^*}| = sqrt(2 - 2 cos(4 pi f_r tau_max)) / (4 pi f_r tau_max); 1 at f_r = 0.
double rho(double f_r, double tau_max);

enum class AmplitudeLaw {
    rayleigh,  // |g_l| = |c_l| / sqrt(L), c_l ~ CN(0, 1)
    constant,  // |g_l| = 1 / sqrt(L)
};

struct PathSet {
    std::vector<double> amplitudes;
    std::vector<double> delays;

    std::size_t size() const noexcept { return delays.size(); }
};

PathSet draw_path_set(int L, double tau_max, Engine& rng, AmplitudeLaw law = AmplitudeLaw::rayleigh);

// sum_l |g_l| e^{-j 2 pi (f_c + shift) tau_l}
cplx evaluate_at_shift(const PathSet& paths, double carrier, double shift);

// Both mirror images in one pass: {g(+shift), g(-shift)}.
std::pair<cplx, cplx> evaluate_pair(const PathSet& paths, double carrier, double shift);

// One realization of every channel the receiver sees. FRM index k is
// (v-1) S + (s-1); per-FRM vectors have M antenna entries.
struct ChannelSet {
    int M = 0;
    int frm_count = 0;
    std::vector<cplx> direct;                 // h_d, M
    std::vector<cplx> user_to_frm;            // h_{v,s}, frm_count
    std::vector<std::vector<cplx>> g_plus;    // [k][m]
    std::vector<std::vector<cplx>> g_minus;   // [k][m]
    std::vector<std::vector<cplx>> z_plus;    // 1/2 h_k g_{+,k,m}
    std::vector<std::vector<cplx>> z_minus;

    // [h_d, z_{+,1}, z_{-,1}, ..., z_{+,K}, z_{-,K}], length (2K + 1) M.
    std::vector<cplx> stacked() const;
    std::size_t stacked_size() const { return std::size_t(2 * frm_count + 1) * std::size_t(M); }
    double energy() const;  // h_all^H h_all

    // Fills z_{+-} from the factors.
    void recompute_cascade();
};

struct ChannelDrawOptions {
    int L = 256;
    AmplitudeLaw law = AmplitudeLaw::rayleigh;
};

// h_d, h i.i.d. CN(0, 1); one PathSet per (FRM, antenna) shared by that
// FRM's + and - shifts, drawn from stream (trial, frm_to_bs, k, m).
ChannelSet draw_channel_set(const FrequencyPlan& plan, int M, const TrialStream& stream,
                            const ChannelDrawOptions& options = {});

// Direct channel only, drawn from the same stream draw_channel_set uses.
std::vector<cplx> draw_direct_channel(int M, const TrialStream& stream);

enum class CorrelationModel {
    pair_only,          // 2x2 block per FRM
    shared_scatterers,  // every shift pair through one scatterer set
};

std::string to_string(CorrelationModel model);
CorrelationModel correlation_model_from_string(const std::string& name);

struct CorrelationMatrix {
    Eigen::MatrixXcd F;       // 2K x 2K over shifts {+f_1, -f_1, ..., +f_K, -f_K}
    int clipped_eigenvalues;  // negative eigenvalues raised to zero
};

CorrelationMatrix build_correlation_matrix(const FrequencyPlan& plan, CorrelationModel model);

// 10 log10(sigma_max / sigma_min); +infinity when sigma_min vanishes.
double condition_number_db(const Eigen::MatrixXcd& F);

}  // namespace fmx::stochchan
