#ifndef MACLAB_SRC_HYPERPARAMS_JSON_HPP
#define MACLAB_SRC_HYPERPARAMS_JSON_HPP

// Internal JSON conversions shared by the snapshot and config loaders; not
// part of the installed API.

#include "json.hpp"
#include "maclab/machine.hpp"

namespace maclab::detail {

nlohmann::json hyperparams_to_json(const HyperParams& params);

/// Strict mode requires every field (snapshots are machine-written, so a
/// missing field means corruption); lenient mode fills absent fields with
/// the kind's defaults for hand-written config files.
HyperParams hyperparams_from_json(MachineKind kind, const nlohmann::json& j,
                                  bool strict);

}  // namespace maclab::detail

#endif  // MACLAB_SRC_HYPERPARAMS_JSON_HPP
