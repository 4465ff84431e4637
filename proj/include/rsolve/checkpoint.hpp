#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rsolve/model.hpp"
#include "rsolve/serialization.hpp"

namespace rsolve {

inline constexpr int kCheckpointVersion = 1;

/// Optimizer buffers (momentum, Adam moments); empty for plain SGD.
struct OptimizerState {
    std::vector<std::vector<double>> slots;

    friend bool operator==(const OptimizerState&, const OptimizerState&) = default;
};

/// Everything beyond theta that a resumed run needs to continue bit-exactly.
struct TrainingState {
    std::int64_t step = 0;
    double loss_ma = 0.0;
    double initial_loss = 0.0;
    double initial_sampled_psi = 0.0;
    OptimizerState optimizer;

    friend bool operator==(const TrainingState&, const TrainingState&) = default;
};

struct Checkpoint {
    ModelParams params;
    std::optional<TrainingState> training;

    friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

/// Versioned JSON header plus base64 little-endian binary64 weight arrays.
Json checkpoint_to_json(const Checkpoint& checkpoint);
Checkpoint checkpoint_from_json(const Json& j);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace rsolve
