#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>

#include "stegainr/errors.hpp"
#include "stegainr/nn.hpp"

namespace stegainr {

/// How the network entering joint training is obtained.
///  - pretrained:       fitted cover network, magnitude mask
///  - xavier_scratch:   Xavier-normal weights without fitting, magnitude mask
///  - random_positions: sine init without fitting, uniformly random mask
enum class InitMode { pretrained, xavier_scratch, random_positions };

inline std::string_view to_string(InitMode m) {
    switch (m) {
    case InitMode::pretrained: return "pretrained";
    case InitMode::xavier_scratch: return "xavier_scratch";
    case InitMode::random_positions: return "random_positions";
    }
    return "?";
}

inline InitMode parse_init_mode(std::string_view s) {
    if (s == "pretrained") return InitMode::pretrained;
    if (s == "xavier_scratch") return InitMode::xavier_scratch;
    if (s == "random_positions") return InitMode::random_positions;
    throw ContractError("unknown init mode '" + std::string(s) + "'");
}

struct TrainingConfig {
    double ratio = 0.05;               // fraction S of weights frozen by the mask
    double lr = 1e-3;                  // joint-training learning rate
    double cover_lr = 1e-3;            // cover fitting (always Adam)
    std::size_t cover_epochs = 20000;
    std::size_t joint_epochs = 50000;
    double lambda_st = 1.0 / 3.0;
    double lambda_se = 1.0 / 3.0;
    OptimizerKind optimizer = OptimizerKind::sgd;
    InitMode init_mode = InitMode::pretrained;
    std::size_t log_every = 100;       // quality-log interval in epochs; 0 disables periodic rows

    void validate() const {
        if (!(ratio > 0.0 && ratio < 1.0)) throw ContractError("ratio S must lie in (0, 1)");
        if (!(lr > 0.0) || !std::isfinite(lr)) throw ContractError("learning rate must be > 0");
        if (!(cover_lr > 0.0) || !std::isfinite(cover_lr)) throw ContractError("cover learning rate must be > 0");
        if (!(lambda_st > 0.0) || !(lambda_se > 0.0)) throw ContractError("loss weights must be > 0");
    }
};

} // namespace stegainr
