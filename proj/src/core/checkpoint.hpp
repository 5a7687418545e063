#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "core/model.hpp"
#include "core/optim.hpp"

namespace addunet {

// Container format:
//   bytes 0..7   magic "ADDUNET1"
//   bytes 8..15  u64 little-endian JSON header length
//   header       UTF-8 JSON: model config, free-form "extra" object, and a
//                tensor manifest [{name, shape, offset}] with offsets relative
//                to the payload start
//   payload      raw little-endian IEEE-754 f64 buffers in manifest order
// Round-trips are bitwise-identical: the JSON is dumped with sorted keys and
// doubles use shortest-exact formatting.
struct Checkpoint {
    ModelConfig config;
    std::vector<std::pair<std::string, Tensor>> tensors;
    nlohmann::json extra = nlohmann::json::object();
};

void write_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint read_checkpoint(const std::string& path);

// Model + optional optimizer state. Adam moment buffers are stored as
// "adam.m.<param>" / "adam.v.<param>" manifest entries.
Checkpoint snapshot(const Model& model, const Adam* adam = nullptr,
                    nlohmann::json extra = nlohmann::json::object());

Model restore_model(const Checkpoint& ckpt);
// Rebuilds the optimizer if the checkpoint carries adam state; returns false
// (and leaves *adam untouched) otherwise.
bool restore_adam(const Checkpoint& ckpt, const Model& model, Adam* adam);

} // namespace addunet
