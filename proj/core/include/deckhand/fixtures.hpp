#pragma once
// Canonical scenario fixture: embedded, versioned text resources for the
// shipboard maintenance scenario. External fixture directories may override
// any of these through the loaders; the embedded set is the default and the
// one the test suite pins.

#include <string_view>

namespace deckhand::fixtures {

inline constexpr std::string_view kFixtureVersion = "canon-1";

std::string_view ontology_text();
std::string_view scripts_text();
std::string_view service_log_text();
std::string_view world_text();

// LLM-facing resources.
std::string_view system_prompt_base();      // shared by both conditions
std::string_view fetchplan_tool_block();    // appended under knowledge equalization
std::string_view narrative_fetch_object();
std::string_view narrative_diagnose();

// Vision meaning representation samples for the two stores-zone thermostats,
// in the canonical frame notation.
std::string_view vmr_sample_old();
std::string_view vmr_sample_new();

}  // namespace deckhand::fixtures
