#pragma once

// Deterministic line-of-sight channels built from 3D coordinates of the
// user, the BS array and the FRM grid.

#include <complex>

#include <Eigen/Core>

#include "fmx/numeric.hpp"
#include "fmx/stochchan.hpp"

namespace fmx::geomchan {

using cplx = std::complex<double>;
using Point = Eigen::Vector3d;

struct SceneGeometry {
    Point user{-50.0, 30.0, 1.0};
    Point bs_first{30.0, 30.0, 10.0};   // o_{b,1}
    Point frm_first{0.0, 0.0, 4.0};     // o_{s,1,1}
    double bs_spacing = 0.1;            // d_b, along x
    double frm_spacing = 0.1;           // d_s, along y (v) and z (s)
    int M = 1;
    int V = 1;
    int S = 1;

    // m, v, s are 1-based.
    Point bs_antenna(int m) const;
    Point frm(int v, int s) const;

    void validate() const;
};

enum class PathlossInterpretation {
    amplitude,  // |h| = (d / d0)^-alpha
    power,      // |h|^2 = (d / d0)^-alpha
};

struct PathlossModel {
    double reference_distance = 50.0;  // d_0
    double exponent = 2.0;             // alpha
    double light_speed = 3.0e8;
    PathlossInterpretation interpretation = PathlossInterpretation::amplitude;

    double amplitude(double distance) const;
    double wavenumber(double frequency) const { return kTwoPi * frequency / light_speed; }

    void validate() const;
};

// (|from - to| / d0)^-alpha e^{-j k |from - to|}
cplx los_component(const Point& from, const Point& to, double wavenumber, const PathlossModel& pl);

// h_d from the user to every antenna, h from the user to every FRM and
// g_{+-} from every FRM to every antenna at f_c +- f_{v,s}; z_{+-} = 1/2 h g_{+-}.
// The plan supplies carrier and mixing frequencies; V and S come from the geometry.
stochchan::ChannelSet assemble_two_path_channels(const SceneGeometry& geom, const PathlossModel& pl,
                                                 const stochchan::FrequencyPlan& plan);

// |h_d + h g|^2 for a static unit reflector (no frequency mixing), first
// antenna and first FRM, user at `user_position`.
double classical_two_path_gain(const SceneGeometry& geom, const PathlossModel& pl, double carrier,
                               const Point& user_position);

}  // namespace fmx::geomchan
