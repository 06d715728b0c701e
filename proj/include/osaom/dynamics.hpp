#pragma once

#include <array>
#include <optional>
#include <vector>

#include "osaom/model.hpp"
#include "osaom/rng.hpp"

namespace osaom {

// Mutable state evolved by mini steps within one period.
struct ModelState {
    BinaryMatrix weak;
    BinaryMatrix strong;
    std::vector<int> behavior;
    double elapsed = 0.0;

    StateView view() const { return {&weak, &strong, &behavior}; }
};

// One candidate outcome of a mini step. For network dependents `target` is
// the alter whose tie is toggled; for behavior `step` is the level change.
// target == -1 && step == 0 encodes the no-change option.
struct Candidate {
    int target = -1;
    int step = 0;
    double objective_gain = 0.0;  // f(candidate) - f(current)
};

struct MiniStepRecord {
    double time = 0.0;
    Dependent dependent = Dependent::Weak;
    int actor = 0;
    int target = -1;  // alter for tie toggles, -1 otherwise
    int step = 0;     // behavior level change
};

struct StateViolation {
    std::string what;
    int i = -1;
    int j = -1;
};

// Checks nesting, behavior grid bounds, and the empty diagonal; returns the
// first violation found.
std::optional<StateViolation> validate_state(const ModelState& state, int grid);

// Per-dependent rate multipliers for one period.
using Rates = std::array<double, kDependents>;

// Score accumulator for likelihood-ratio derivative estimates: one entry per
// model parameter, d log P(trajectory) / d theta_k.
struct ScoreAccumulator {
    ParamLayout layout;
    int period = 0;
    std::vector<double> score;
};

struct SimulationStats {
    std::array<int, kDependents> steps{};  // executed mini steps per dependent
};

// Evaluates and executes mini steps for fixed coefficients.
class ChoiceEngine {
  public:
    ChoiceEngine(const ModelSpec& model, std::array<std::vector<double>, kDependents> theta);

    const ModelSpec& model() const { return *model_; }

    // Permitted candidate set including no-change; objective gains filled in.
    // Weak ties backing a strong tie cannot be dropped; strong ties can only
    // be added where a weak tie exists; behavior moves are clipped to the
    // grid.
    std::vector<Candidate> candidates(const ModelState& state, int actor, Dependent d) const;

    // Multinomial choice probabilities over `candidates`, computed with
    // max-subtraction. Throws NumericalError when an objective is not finite.
    std::vector<double> probabilities(const std::vector<Candidate>& candidates, int actor,
                                      Dependent d) const;

    // Draws and applies one mini step; returns the record of what happened.
    MiniStepRecord execute_mini_step(ModelState& state, int actor, Dependent d, Rng& rng,
                                     ScoreAccumulator* scores) const;

    // Runs the continuous-time process over unit simulated time. Events
    // arrive at total rate n * (sum of rates); the dependent is picked
    // proportional to its rate and the actor uniformly.
    SimulationStats simulate_period(ModelState& state, const Rates& rates, Rng& rng,
                                    std::vector<MiniStepRecord>* log = nullptr,
                                    ScoreAccumulator* scores = nullptr) const;

  private:
    const ModelSpec* model_;
    std::array<std::vector<double>, kDependents> theta_;
};

}  // namespace osaom
