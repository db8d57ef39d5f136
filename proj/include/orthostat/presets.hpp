#pragma once

#include <string>
#include <vector>

namespace orthostat {

/// Bundled 50-component benchmark inputs x0..x3 (components drawn once from
/// (0,1) and frozen). All single-input runs default to x0; pair-mode runs use
/// (x0, x1).
const std::vector<double>& preset_input(const std::string& name);

const std::vector<std::string>& preset_names();

}  // namespace orthostat
