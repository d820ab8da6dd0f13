#pragma once

#include <string>

#include "citcp/harness.hpp"
#include "citcp/textcfg.hpp"

namespace citcp {

// Builds an experiment from parsed config text. Every key is optional and
// falls back to the built-in default; unknown keys are rejected. Throws
// ConfigError naming the offending key.
ExperimentConfig experiment_from_config(const TextConfig& text);

// Canonical key/value echo with every default resolved; parsing it back
// reproduces the same experiment.
TextConfig resolved_config(const ExperimentConfig& cfg);

// Standalone generator config (top-level keys only), for `citcp synth`.
SynthConfig synth_from_config(const TextConfig& text);

}  // namespace citcp
