#pragma once

#include <map>
#include <string>

#include "rsg/tensor.hpp"

namespace rsg {

// Checkpoint container: magic "RSCK", then a named-tensor table written in
// sorted name order (f32 payloads). Parameters live under their own names;
// EMA shadows under "ema.", optimizer state under "opt.", config scalars
// under "config.", trainer counters under "train.".
void save_checkpoint(const std::string& path, const std::map<std::string, Tensorf>& entries);
std::map<std::string, Tensorf> load_checkpoint(const std::string& path);

inline Tensorf scalar_entry(double v) {
    Tensorf t(1, 1);
    t.at(0, 0) = static_cast<float>(v);
    return t;
}

}  // namespace rsg
