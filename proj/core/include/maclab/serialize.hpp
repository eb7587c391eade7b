#ifndef MACLAB_SERIALIZE_HPP
#define MACLAB_SERIALIZE_HPP

#include <filesystem>
#include <string>

#include "maclab/mac.hpp"
#include "maclab/machine.hpp"
#include "maclab/rivals.hpp"

namespace maclab {

// Versioned JSON snapshots. Numbers are written with enough digits to
// restore bit-identical doubles, so a reloaded model predicts exactly what
// the original did. Loaders throw bad-format on anything they cannot
// reconstruct.

std::string machine_to_json(const FittedMachine& machine);
FittedMachine machine_from_json(const std::string& text);

std::string mac_to_json(const MacModel& model);
MacModel mac_from_json(const std::string& text);

std::string sl_to_json(const SuperLearnerModel& model);
SuperLearnerModel sl_from_json(const std::string& text);

std::string boost_to_json(const LsBoostModel& model);
LsBoostModel boost_from_json(const std::string& text);

void save_text(const std::string& text, const std::filesystem::path& path);
std::string load_text(const std::filesystem::path& path);

}  // namespace maclab

#endif  // MACLAB_SERIALIZE_HPP
