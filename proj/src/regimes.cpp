#include "jcloss/regimes.hpp"

#include <cmath>
#include <limits>

namespace jcloss {

void PhysicalParams::validate() const {
    if (!(Delta0 > 0.0)) throw ConfigError("Delta0 must be > 0");
    if (!(epsilon > 0.0) || !(V > 0.0)) throw ConfigError("epsilon and V must be > 0");
    if (!(omega > 0.0)) throw ConfigError("omega must be > 0");
    if (!(hbar > 0.0)) throw ConfigError("hbar must be > 0");
    const double e = E();
    if (std::abs(hbar * omega - e) > 1e-9 * e)
        throw ConfigError("resonance condition hbar*omega = sqrt(Delta^2 + Delta0^2) violated");
}

double field_per_photon(const PhysicalParams& phys) {
    phys.validate();
    return std::sqrt(phys.hbar * phys.omega / (2.0 * phys.epsilon * phys.V));
}

double compute_coupling(const PhysicalParams& phys) {
    phys.validate();
    const double f0p = std::sqrt(phys.hbar * phys.omega / (2.0 * phys.epsilon * phys.V));
    return phys.p * std::cos(phys.theta) * f0p * phys.Delta0 / (2.0 * phys.hbar * phys.E());
}

QuasistaticTls quasistatic_tls(double R, double T1, double T2) {
    if (R < 0.0) throw DomainError("quasistatic_tls: R must be >= 0");
    const double r2 = R * R;
    QuasistaticTls q;
    q.sigma_pp = 0.5 * r2 / (1.0 + r2);
    const double w = R / (1.0 + r2);
    q.coherence_sq = (T2 / (4.0 * T1)) * w * w;
    return q;
}

double gamma_effective(double g, double T1, double T2) {
    if (!(g > 0.0) || !(T1 > 0.0) || !(T2 > 0.0))
        throw DomainError("gamma_effective requires positive g, T1, T2");
    return 1.0 / (1.0 / (2.0 * g * g * T2) + T1);
}

double weak_unsaturated_n(double t, double n0, double Gamma) {
    return n0 * std::exp(-Gamma * t);
}

SaturatedN saturated_n(double t, double n0, double T1, double n_w) {
    SaturatedN out;
    out.n = n0 - t / (2.0 * T1);
    out.valid = t <= 2.0 * T1 * (n0 - n_w);
    return out;
}

double dimensionless_field(double g, double n0, double T1, double T2) {
    return 2.0 * g * std::sqrt(n0 * T1 * T2);
}

double loss_classical(double R0, double g, double T2, double omega) {
    return 2.0 * g * g * T2 / (omega * (1.0 + R0 * R0));
}

double loss_weak_unsaturated(double g, double T1, double T2, double omega) {
    if (g > std::max(1.0 / T1, 1.0 / T2))
        throw DomainError("loss_weak_unsaturated: g is in the strong-coupling regime");
    return gamma_effective(g, T1, T2) / omega;
}

double loss_saturated(double n0, double T1, double omega) {
    if (!(n0 > 0.0)) throw DomainError("loss_saturated: n0 must be > 0");
    return 1.0 / (2.0 * n0 * T1 * omega);
}

double loss_strong_unsaturated(double T1, double T2, double omega) {
    return (1.0 / (3.0 * omega)) * (1.0 / T1 + 1.0 / T2);
}

KneeWeak knee_weak(double g, double T1, double T2) {
    KneeWeak k;
    k.exact = 1.0 / (2.0 * T1 * gamma_effective(g, T1, T2));
    k.very_weak = 1.0 / (4.0 * g * g * T1 * T2);
    return k;
}

double knee_strong(double T1, double T2) {
    return 1.5 / (1.0 + T1 / T2);
}

RegimeReport classify_regime(const ModelParams& params) {
    params.validate();
    const double T1 = params.T1, T2 = params.T2();
    RegimeReport rep;
    rep.coupling = (params.g > std::max(1.0 / T1, 1.0 / T2)) ? Coupling::Strong
                                                             : Coupling::Weak;
    rep.R0 = dimensionless_field(params.g, params.n0, T1, T2);
    if (params.g == 0.0) {
        // Decoupled resonator: nothing saturates.
        rep.n_crit = std::numeric_limits<double>::infinity();
        rep.saturation = Saturation::Unsaturated;
        return rep;
    }
    rep.n_crit = (rep.coupling == Coupling::Strong) ? knee_strong(T1, T2)
                                                    : knee_weak(params.g, T1, T2).exact;
    if (params.n0 < 0.5 * rep.n_crit)
        rep.saturation = Saturation::Unsaturated;
    else if (params.n0 > 2.0 * rep.n_crit)
        rep.saturation = Saturation::Saturated;
    else
        rep.saturation = Saturation::Crossover;
    return rep;
}

const char* to_string(Coupling c) {
    return c == Coupling::Weak ? "weak" : "strong";
}

const char* to_string(Saturation s) {
    switch (s) {
        case Saturation::Unsaturated: return "unsaturated";
        case Saturation::Crossover: return "crossover";
        default: return "saturated";
    }
}

}  // namespace jcloss
