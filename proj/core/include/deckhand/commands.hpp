#pragma once
// The parameterized command surface shared by every strategic layer. Both
// agents must emit exactly this set, so the schema registry lives in one
// place and both sides validate against it.

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace deckhand {

using Json = nlohmann::ordered_json;

struct Command {
    std::string name;  // SEARCH WAYPOINT PICKUP DROPOBJECT GRIPPER STOP RANDOMWALK
    Json params = Json::object();

    bool operator==(const Command&) const = default;
};

struct ParamSpec {
    std::string name;
    std::string type;  // "string" | "object" | "array"
    bool required = false;
    std::string description;
};

struct CommandSchema {
    std::string name;
    std::string description;
    std::vector<ParamSpec> params;
};

// The seven tactical commands, in canonical order.
const std::vector<CommandSchema>& command_schemas();

const CommandSchema* command_schema(std::string_view name);

// Empty string when valid, else a human-readable violation.
std::string validate_command(const Command& cmd);

}  // namespace deckhand
