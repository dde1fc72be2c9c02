#pragma once

#include <memory>
#include <vector>

#include "cpband/elliptic.hpp"

namespace cpband {

// Two-species kinetics du/dt = Du lap_S u - u v^2 + F(1-u),
// dv/dt = Dv lap_S v + u v^2 - (F+k) v, with leakage boundary conditions
// du/dn + kappa u = 0 (same for v).
struct GrayScottParams {
    double F = 0.010;
    double k = 0.042;
    double Du = 8e-5;
    double Dv = 0.4 * 8e-5;
    double kappa = 0.0;
    double T = 4000.0;
    double dt = 1.0;
};

// Initial disturbance: patches of lowered substrate seeded at random surface
// points; membership is decided through cp so the state starts constant
// along normals.
struct Perturbation {
    int patches = 8;
    double radius = 0.1;
    double u_inside = 0.5;
    double v_inside = 0.25;
};

struct SimulationState {
    Eigen::VectorXd u;
    Eigen::VectorXd v;
    double time = 0.0;
    long step = 0;
};

struct SummaryRow {
    double time;
    double variance_u;
    double variance_v;
};

struct RunResult {
    std::vector<SimulationState> snapshots;
    std::vector<SummaryRow> summary;  // one row per step, plus the initial state
};

// Deterministic patch centers for a seed (chord-radius disks around them).
std::vector<Vec3> patch_centers(const Surface& surface, unsigned seed, int patches);

// u = 1, v = 0 everywhere, then the patch values inside the seeded disks.
SimulationState init_state(const BandGrid& grid, unsigned seed,
                           const Perturbation& perturbation = {});

// One implicit-diffusion / explicit-reaction Euler step per species. The two
// time-step matrices
//   M_s = (1/dt) I - D_s Ebar L + gamma (I - Ebar + kappa D E)
// are factored once at construction and reused for every step; the reaction
// terms are evaluated at the E-interpolated current values, so each step also
// re-extends both species through the penalty rows.
class GrayScottStepper {
public:
    GrayScottStepper(const TubeOperators& ops, const GrayScottParams& params);
    ~GrayScottStepper();
    GrayScottStepper(GrayScottStepper&&) noexcept;

    void advance(SimulationState& state) const;  // throws NonFinite on blowup

    const GrayScottParams& params() const { return params_; }

private:
    GrayScottParams params_;
    const SparseMat* E_;
    std::unique_ptr<DirectSolver> solve_u_;
    std::unique_ptr<DirectSolver> solve_v_;
};

// Integrates to params.T with fixed dt from the seeded initial state,
// snapshotting at the requested times (nearest step) and recording the
// spatial variance of both species at every step.
RunResult run(const GrayScottParams& params, const BandGrid& grid, const TubeOperators& ops,
              const std::vector<double>& snapshot_times, unsigned seed,
              const Perturbation& perturbation = {});

} // namespace cpband
