#include "deckhand/fixtures.hpp"

namespace deckhand::fixtures {

std::string_view ontology_text() {
    return R"(// shipboard maintenance ontology, fixture canon-1
@ALL
@PHYSICAL-OBJECT
  IS-A ALL
@EVENT
  IS-A ALL
@PROPERTY
  IS-A ALL
@ANIMATE
  IS-A PHYSICAL-OBJECT
@HUMAN
  IS-A ANIMATE
@ROBOT
  IS-A PHYSICAL-OBJECT
@LEIA
  IS-A ROBOT
@ZONE
  IS-A ALL
@ENGINE-ROOM
  IS-A ZONE
@CORRIDOR
  IS-A ZONE
@STORES-ZONE
  IS-A ZONE
@MACHINE
  IS-A PHYSICAL-OBJECT
@ENGINE
  IS-A MACHINE
@PUMP
  IS-A MACHINE
@DEVICE
  IS-A PHYSICAL-OBJECT
@PIPE
  IS-A DEVICE
@THERMOSTAT
  IS-A DEVICE
  SLOT age number
  SLOT label symbol
  SLOT color symbol
@MALFUNCTION-SYMPTOM
  IS-A EVENT
@OVERHEAT
  IS-A MALFUNCTION-SYMPTOM
  SLOT theme @MACHINE
  CAUSED-BY OBSTRUCT(theme @PIPE) IF-THEME ENGINE
  CAUSED-BY STATE-OF-REPAIR(domain @THERMOSTAT, range <0.7) IF-THEME ENGINE
@OBSTRUCT
  IS-A EVENT
  SLOT theme @DEVICE
@STATE-OF-REPAIR
  IS-A PROPERTY
  SLOT domain @PHYSICAL-OBJECT
  SLOT range number
@SPEECH-ACT
  IS-A EVENT
  SLOT agent @ANIMATE
  SLOT beneficiary @PHYSICAL-OBJECT
  SLOT theme @ALL
@DESCRIBE-MECHANICAL-PROBLEM
  IS-A SPEECH-ACT
  TRIGGERS-GOAL HYPOTHESIZE-MECHANICAL-PROBLEM-CAUSE
@REQUEST-ACTION
  IS-A SPEECH-ACT
@REQUEST-ACTION-FETCH
  IS-A REQUEST-ACTION
  TRIGGERS-GOAL FETCH
@REQUEST-ACTION-ANALYZE-LOGS
  IS-A REQUEST-ACTION
  TRIGGERS-GOAL ANALYZE-MAINTENANCE-LOGS
@DESCRIBE-OBJECT-FEATURES
  IS-A SPEECH-ACT
@REQUEST-INFO
  IS-A SPEECH-ACT
@ACKNOWLEDGE
  IS-A SPEECH-ACT
@INFORM-COMPLETION
  IS-A SPEECH-ACT
@RECOMMEND-REPLACEMENT
  IS-A SPEECH-ACT
@REPORT-NO-CAUSES
  IS-A SPEECH-ACT
@REPORT-INABILITY
  IS-A SPEECH-ACT
@ALTERNATIVE
  IS-A ALL
@MODALITY
  IS-A ALL
@HYPOTHESIZE-MECHANICAL-PROBLEM-CAUSE
  IS-A EVENT
@ANALYZE-MAINTENANCE-LOGS
  IS-A EVENT
@FETCH
  IS-A EVENT
)";
}

std::string_view scripts_text() {
    return R"(// procedural knowledge, fixture canon-1
SCRIPT DIAGNOSE-MALFUNCTION
  GOAL HYPOTHESIZE-MECHANICAL-PROBLEM-CAUSE
  STEP TOOL FIND-CAUSES symptom=$theme
  STEP SPEECH REPORT-CAUSES
SCRIPT ANALYZE-SERVICE-LOGS
  GOAL ANALYZE-MAINTENANCE-LOGS
  STEP TOOL SEARCHLOGS query=$hypothesis-components
  STEP SPEECH REPORT-LOG-CONCLUSION
SCRIPT FETCH-OBJECT
  GOAL FETCH
  PRECONDITION features-of-theme FROM situation-model ask-teammate
  PRECONDITION location-of-theme FROM situation-model episodic-memory ask-teammate
  STEP COMMAND SEARCH zone=$location-of-theme object=$theme-type features=$features-of-theme
  STEP COMMAND PICKUP object=$candidate
  STEP COMMAND WAYPOINT waypoint=$requester-location
  STEP COMMAND DROPOBJECT place=floor
METASCRIPT ASK-TEAMMATE-OBJECT-FEATURES
  RESOLVES features-of-theme
  STEP SPEECH ASK-FEATURES
METASCRIPT ASK-TEAMMATE-OBJECT-LOCATION
  RESOLVES location-of-theme
  STEP SPEECH ASK-LOCATION
)";
}

std::string_view service_log_text() {
    // 16 entries across two years of engine-room maintenance.
    return "2023-07-01\tthermostat\tinstalled\treplacement unit fitted to engine coolant loop\n"
           "2023-08-14\tengine\tinspection\troutine check, nominal\n"
           "2023-10-02\tpump\tlubrication\troutine service\n"
           "2023-12-09\tengine\tcoolant top-up\tlevel low, topped up\n"
           "2024-02-17\tpipe\tinspection\tscale buildup noted in coolant pipe\n"
           "2024-03-05\tpipe\tdescaling\tcoolant pipe descaled\n"
           "2024-05-21\tengine\tinspection\troutine check, nominal\n"
           "2024-07-30\tpump\tgasket replaced\tminor seep at pump housing\n"
           "2024-09-12\tthermostat\tinspection\tsluggish response at low RPM\n"
           "2024-11-08\tengine\tinspection\troutine check, nominal\n"
           "2025-01-19\tsensor\tcalibration\tcoolant temperature sensor recalibrated\n"
           "2025-03-02\tthermostat\tinspection\tresponse lag worsening, monitor\n"
           "2025-04-28\tengine\toverheating event\tbrief overheat under load, cause not confirmed\n"
           "2025-05-20\tpipe\tflush\tno obstruction found\n"
           "2025-06-11\tengine\toverheating event\tsecond overheat under load\n"
           "2025-06-30\tengine\tcoolant replaced\troutine renewal\n";
}

std::string_view world_text() {
    return R"(// shipboard world, fixture canon-1
WORLD
  bounds 0 0 24 12
  tick-budget 600
  delivery-radius 1.0
  trial-date 2025-07-15
  cruise-speed 1.0
  grasp-radius 0.5
  detection-range 3.0
  label-range 1.5
  approach-stop 0.35
ZONE engine-room
  rect 0 0 8 12
ZONE corridor
  rect 8 0 12 12
ZONE stores-zone
  rect 12 0 24 12
  sweep 13 2 13 10 16 10 16 2 19 2 19 10
WAYPOINT daniel-location 4 6 0.75
WAYPOINT stores-entry 12 4.3 0
WAYPOINT stores-far 23 4.3 0
WAYPOINT engine-room 2.5 6 0.75
DANIEL 4 6
ROBOT 5 6
OBJECT obj-engine ENGINE
  pose 2 6
  radius 0.6
  label engine-main
OBJECT obj-thermo-old THERMOSTAT
  pose 13 6
  radius 0.15
  label thermostat-old
  age 0.9
  color grey
OBJECT obj-thermo-new THERMOSTAT
  pose 17 4
  radius 0.15
  label thermostat-new
  age 0.05
  color grey
EPISODIC 0 THERMOSTAT located-in @STORES-ZONE
SITUATION HUMAN.1 located-at daniel-location
SITUATION LEIA.1
SITUATION ENGINE.1
DIALOGUE m1 at-start "The engine is overheating."
DIALOGUE m3 after-agent-reply "Can you check the service logs?"
DIALOGUE m5 after-agent-reply "Please fetch a new thermostat."
DIALOGUE m7 after-agent-question "It is a grey cylinder labeled thermostat-new."
)";
}

std::string_view system_prompt_base() {
    return R"(You are the strategic controller of a shipboard maintenance robot working
alongside the mechanic Daniel. You receive a perception frame from the
tactical layer at 2 Hz: robot pose, detected objects, collision status, and
gripper contents. Dialogue from Daniel, your prior actions, and their
outcomes are included in every request.

Respond each cycle with exactly one of:
- a tool call (an action or knowledge query),
- a short utterance to Daniel, or
- the literal text :::WAITING::: when no new dialogue or action is needed.

Actions are dispatched to a tactical layer that executes them on the robot.

Available actions:
- SEARCH(zone, object, features?, exclude?): navigate the zone's sweep path
  while scanning for objects of the given type. The tactical layer handles
  detection and stops the robot automatically within grasp range of each
  candidate, reporting its observed features. This closes the
  perception-action loop at the tactical layer.
- WAYPOINT(waypoint): navigate a stored path WITHOUT integrated perception.
  The robot does not stop for detected objects on the way; the
  only mid-path halt is a separate STOP command from you, which takes effect
  only after the perception-report/command round trip, by which time the
  robot has continued moving.
- PICKUP(object): grasp the object; it must be within grasp range and the
  gripper must be empty.
- DROPOBJECT(place): release the held object at a relative place (e.g. floor).
- GRIPPER(state): open or close the gripper.
- STOP(): halt all motion.
- RANDOMWALK(): wander randomly.

Knowledge tools:
- SEARCHLOGS(query): search the ship's engine service log (16 entries over
  two years). Empty query returns every entry.

Perception handling rules: trust only the perception frame and Daniel's
dialogue for facts about the world; report uncertainty honestly; never claim
an action succeeded unless its outcome confirms it.
)";
}

std::string_view fetchplan_tool_block() {
    return R"(
Procedure retrieval:
- FETCHPLAN(procedure): retrieve the narrative description of a stored
  procedure. Available procedures: FETCH-OBJECT, DIAGNOSE. Consult the
  relevant procedure before undertaking a task.
)";
}

std::string_view narrative_fetch_object() {
    return R"(FETCH-OBJECT procedure.
Goal: retrieve a requested object and deliver it to the requester.
You must know the object's identifying features and its storage location
before taking any physical action. If the features are not established in
dialogue or memory, ask your teammate what the object looks like and wait for
the answer. The storage location may come from memory of where such objects
are kept. Then: (1) use SEARCH with the zone, the object type, and the known
features - SEARCH stops automatically at candidates, and you must verify the
reported features against the expected ones before picking anything up;
reject mismatching candidates and resume the search; (2) PICKUP the verified
object; (3) WAYPOINT to the requester's location; (4) DROPOBJECT to release
it. Do not substitute WAYPOINT for SEARCH when locating the object: WAYPOINT
does not stop on detection, and a late STOP leaves the robot past the target.
)";
}

std::string_view narrative_diagnose() {
    return R"(DIAGNOSE procedure.
Goal: propose causes for a reported mechanical malfunction.
First generate candidate causes from domain knowledge of the machinery - the
causal relations of the malfunctioning component - before consulting any log
or external record. Report the hypotheses to the teammate with the
uncertainty made explicit when evidence does not yet favor one cause. Only
after reporting domain hypotheses, consult the engine service log (SEARCHLOGS)
to confirm or eliminate them, and report the refined conclusion.
)";
}

std::string_view vmr_sample_old() {
    return R"(#THERMOSTAT.1
  object-id "obj-thermo-old"
  label thermostat-old
  age 0.9
  color grey
)";
}

std::string_view vmr_sample_new() {
    return R"(#THERMOSTAT.1
  object-id "obj-thermo-new"
  label thermostat-new
  age 0.05
  color grey
)";
}

}  // namespace deckhand::fixtures
