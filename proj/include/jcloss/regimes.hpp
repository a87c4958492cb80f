#pragma once

#include "jcloss/lindblad.hpp"

namespace jcloss {

// Microscopic TLS and field parameters from which the coupling g derives.
// hbar defaults to 1 (dimensionless reproduction); pass an explicit value for
// unit-ful estimates. The resonance condition hbar*omega = sqrt(Delta^2 +
// Delta0^2) is enforced at construction.
struct PhysicalParams {
    double p;        // dipole moment (charge x tunneling length)
    double theta;    // angle between field and dipole axis, radians
    double Delta;    // asymmetry energy
    double Delta0;   // tunneling energy
    double epsilon;  // permittivity
    double V;        // effective mode volume
    double omega;    // resonator angular frequency
    double hbar = 1.0;

    double E() const { return std::sqrt(Delta * Delta + Delta0 * Delta0); }
    void validate() const;
};

// sqrt(hbar * omega / (2 epsilon V)), the electric field per photon.
double field_per_photon(const PhysicalParams& phys);

// g = p cos(theta) F0' Delta0 / (2 hbar E)
double compute_coupling(const PhysicalParams& phys);

// Quasistatic TLS response to a drive of dimensionless strength R:
// upper-level population and squared internal coherence.
struct QuasistaticTls {
    double sigma_pp;      // R^2 / (2 (1 + R^2))
    double coherence_sq;  // (T2 / 4 T1) * [R / (1 + R^2)]^2
};
QuasistaticTls quasistatic_tls(double R, double T1, double T2);

// Effective weak-coupling decay rate, 1/Gamma = 1/(2 g^2 T2) + T1.
double gamma_effective(double g, double T1, double T2);

// <n(t)> = n0 e^{-Gamma t}
double weak_unsaturated_n(double t, double n0, double Gamma);

// <n(t)> = n0 - t/(2 T1), unclamped; valid while the TLS stays saturated,
// i.e. t <= 2 T1 (n0 - n_w).
struct SaturatedN {
    double n;
    bool valid;
};
SaturatedN saturated_n(double t, double n0, double T1, double n_w = 0.0);

// R0 = 2 g sqrt(n0 T1 T2), the initial Rabi frequency over the geometric mean
// of the decay rates.
double dimensionless_field(double g, double n0, double T1, double T2);

// Classical steady-drive loss tangent, 1/Q_C = 2 g^2 T2 / (omega (1 + R0^2)).
double loss_classical(double R0, double g, double T2, double omega);

// Gamma/omega; weak coupling only (throws DomainError when g > max(1/T1, 1/T2)).
double loss_weak_unsaturated(double g, double T1, double T2, double omega);

// 1/(2 n0 T1 omega), the saturated ("dry friction") loss.
double loss_saturated(double n0, double T1, double omega);

// (1/3 omega)(1/T1 + 1/T2), the strong-coupling unsaturated plateau.
double loss_strong_unsaturated(double T1, double T2, double omega);

// Weak-coupling knee photon number n_w = 1/(2 T1 Gamma), with the very-weak
// approximation 1/(4 g^2 T1 T2).
struct KneeWeak {
    double exact;
    double very_weak;
};
KneeWeak knee_weak(double g, double T1, double T2);

// Strong-coupling knee n_s = (3/2) / (1 + T1/T2); independent of g.
double knee_strong(double T1, double T2);

enum class Coupling { Weak, Strong };
enum class Saturation { Unsaturated, Crossover, Saturated };

struct RegimeReport {
    Coupling coupling;
    Saturation saturation;
    double R0;
    double n_crit;  // n_w (weak) or n_s (strong)
};

// Strong iff g > max(1/T1, 1/T2). Saturation compares n0 against the
// applicable knee with a crossover band [0.5, 2] x n_crit.
RegimeReport classify_regime(const ModelParams& params);

const char* to_string(Coupling c);
const char* to_string(Saturation s);

}  // namespace jcloss
