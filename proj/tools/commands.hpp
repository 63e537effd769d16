#pragma once

#include <CLI11.hpp>

namespace manikey::cli {

/// Register synth, precompute, train, eval and ablate on the app.
/// Callbacks run during parse; library errors propagate to the caller.
void setup(CLI::App& app);

}  // namespace manikey::cli
