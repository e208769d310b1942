#include "deckhand/commands.hpp"

namespace deckhand {

const std::vector<CommandSchema>& command_schemas() {
    static const std::vector<CommandSchema> schemas = {
        {"SEARCH",
         "Navigate a zone's sweep path scanning for objects of a type, stopping automatically "
         "within grasp range of each candidate.",
         {{"zone", "string", true, "zone to sweep"},
          {"object", "string", true, "object type to scan for"},
          {"features", "object", false, "expected feature constraints"},
          {"exclude", "array", false, "object ids to skip"}}},
        {"WAYPOINT",
         "Navigate a stored path to a named waypoint without integrated perception.",
         {{"waypoint", "string", true, "waypoint id"}}},
        {"PICKUP",
         "Grasp an object within grasp range; requires an empty gripper.",
         {{"object", "string", true, "object id"}}},
        {"DROPOBJECT",
         "Release the held object at a relative place.",
         {{"place", "string", true, "relative drop location, e.g. floor"}}},
        {"GRIPPER",
         "Actuate the gripper.",
         {{"state", "string", true, "open or close"}}},
        {"STOP", "Halt all motion.", {}},
        {"RANDOMWALK", "Wander using the seeded random stream.", {}},
    };
    return schemas;
}

const CommandSchema* command_schema(std::string_view name) {
    for (const auto& s : command_schemas())
        if (s.name == name) return &s;
    return nullptr;
}

std::string validate_command(const Command& cmd) {
    const CommandSchema* schema = command_schema(cmd.name);
    if (!schema) return "unknown command '" + cmd.name + "'";
    for (const auto& p : schema->params) {
        if (!cmd.params.contains(p.name)) {
            if (p.required) return cmd.name + ": missing required parameter '" + p.name + "'";
            continue;
        }
        const Json& v = cmd.params.at(p.name);
        bool ok = (p.type == "string" && v.is_string()) || (p.type == "object" && v.is_object()) ||
                  (p.type == "array" && v.is_array());
        if (!ok) return cmd.name + ": parameter '" + p.name + "' must be a " + p.type;
    }
    for (const auto& [key, value] : cmd.params.items()) {
        bool known = false;
        for (const auto& p : schema->params) known = known || p.name == key;
        if (!known) return cmd.name + ": unknown parameter '" + key + "'";
    }
    return "";
}

}  // namespace deckhand
