#pragma once

#include <string>

#include "msnet/graph.hpp"

namespace msnet {

/// MSWT weights container, little-endian: magic "MSWT", u16 version=1,
/// u32 config_json_len + the resolved run-config JSON, u32 slot_count, then
/// per slot (in store order): u16 name_len + name, conv geometry (u16
/// out/in/kh/kw/stride/padding, u8 per_channel), u64 weight count + doubles,
/// u64 bias count + doubles. Momentum buffers are not persisted.
void save_weights(const ParamStore& store, const std::string& config_json,
                  const std::string& path);

struct LoadedWeights {
    ParamStore store;  // names, shapes and values; init/role metadata defaults
    std::string config_json;
};

LoadedWeights load_weights(const std::string& path);

/// Copies values from a loaded store into a freshly built one, checking slot
/// order, names and shapes.
void assign_weights(ParamStore& into, const ParamStore& from);

}  // namespace msnet
