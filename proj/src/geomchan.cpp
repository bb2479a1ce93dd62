#include "fmx/geomchan.hpp"

#include <cmath>

#include "fmx/errors.hpp"
#include "fmx/numeric.hpp"

namespace fmx::geomchan {

Point SceneGeometry::bs_antenna(int m) const { return bs_first + Point{(m - 1) * bs_spacing, 0.0, 0.0}; }

Point SceneGeometry::frm(int v, int s) const {
    return frm_first + Point{0.0, (v - 1) * frm_spacing, (s - 1) * frm_spacing};
}

void SceneGeometry::validate() const {
    if (!(bs_spacing > 0.0)) throw ConfigError("bs_spacing", "must be positive");
    if (!(frm_spacing > 0.0)) throw ConfigError("frm_spacing", "must be positive");
    if (M < 1) throw ConfigError("M", "must be >= 1");
    if (V < 0 || S < 0) throw ConfigError("V/S", "must be non-negative");
}

double PathlossModel::amplitude(double distance) const {
    const double ratio = distance / reference_distance;
    return interpretation == PathlossInterpretation::amplitude ? std::pow(ratio, -exponent)
                                                               : std::pow(ratio, -0.5 * exponent);
}

void PathlossModel::validate() const {
    if (!(reference_distance > 0.0)) throw ConfigError("reference_distance", "must be positive");
    if (!(exponent > 0.0)) throw ConfigError("pathloss_exponent", "must be positive");
    if (!(light_speed > 0.0)) throw ConfigError("light_speed", "must be positive");
}

cplx los_component(const Point& from, const Point& to, double wavenumber, const PathlossModel& pl) {
    const double d = (from - to).norm();
    if (!(d > 0.0)) throw DomainError("coincident endpoints");
    // Phase reduced modulo 2 pi in cycles to keep precision at GHz carriers.
    const double cycles = wavenumber * d / kTwoPi;
    return std::polar(pl.amplitude(d), -kTwoPi * frac(cycles));
}

stochchan::ChannelSet assemble_two_path_channels(const SceneGeometry& geom, const PathlossModel& pl,
                                                 const stochchan::FrequencyPlan& plan) {
    geom.validate();
    pl.validate();
    stochchan::ChannelSet c;
    c.M = geom.M;
    c.frm_count = geom.V * geom.S;
    const double k0 = pl.wavenumber(plan.carrier);

    c.direct.resize(std::size_t(geom.M));
    for (int m = 1; m <= geom.M; ++m) c.direct[std::size_t(m - 1)] = los_component(geom.user, geom.bs_antenna(m), k0, pl);

    c.user_to_frm.resize(std::size_t(c.frm_count));
    c.g_plus.assign(std::size_t(c.frm_count), std::vector<cplx>(std::size_t(geom.M)));
    c.g_minus.assign(std::size_t(c.frm_count), std::vector<cplx>(std::size_t(geom.M)));
    for (int v = 1; v <= geom.V; ++v)
        for (int s = 1; s <= geom.S; ++s) {
            const std::size_t k = std::size_t((v - 1) * geom.S + (s - 1));
            const Point o_s = geom.frm(v, s);
            const double f = double((v - 1) * geom.S + s) * plan.spacing;
            c.user_to_frm[k] = los_component(geom.user, o_s, k0, pl);
            for (int m = 1; m <= geom.M; ++m) {
                const Point o_b = geom.bs_antenna(m);
                c.g_plus[k][std::size_t(m - 1)] = los_component(o_s, o_b, pl.wavenumber(plan.carrier + f), pl);
                c.g_minus[k][std::size_t(m - 1)] = los_component(o_s, o_b, pl.wavenumber(plan.carrier - f), pl);
            }
        }
    c.recompute_cascade();
    return c;
}

double classical_two_path_gain(const SceneGeometry& geom, const PathlossModel& pl, double carrier,
                               const Point& user_position) {
    pl.validate();
    const double k0 = pl.wavenumber(carrier);
    const Point o_b = geom.bs_antenna(1);
    const Point o_s = geom.frm(1, 1);
    const cplx hd = los_component(user_position, o_b, k0, pl);
    const cplx h = los_component(user_position, o_s, k0, pl);
    const cplx g = los_component(o_s, o_b, k0, pl);
    return std::norm(hd + h * g);
}

}  // namespace fmx::geomchan
