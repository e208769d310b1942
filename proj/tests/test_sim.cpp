#include <doctest.h>

#include "deckhand/sim.hpp"

using namespace deckhand;

TEST_CASE("canonical fixture spawns the scenario layout") {
    ScenarioFixture fx = canonical_fixture();
    World w = World::spawn(fx, 0);
    int thermostats_in_stores = 0;
    const Zone* stores = fx.zone("stores-zone");
    REQUIRE(stores != nullptr);
    for (const auto& o : w.objects())
        if (o.shape_class == "THERMOSTAT" && stores->area.contains(o.pose))
            ++thermostats_in_stores;
    CHECK(thermostats_in_stores == 2);
    CHECK(fx.waypoint("daniel-location") != nullptr);
    CHECK_FALSE(stores->sweep_path.empty());
}

TEST_CASE("spawn is deterministic") {
    ScenarioFixture fx = canonical_fixture();
    World a = World::spawn(fx, 7);
    World b = World::spawn(fx, 7);
    CHECK(a.state_hash() == b.state_hash());
}

TEST_CASE("fixture missing the stores zone is rejected") {
    CHECK_THROWS(parse_fixture("WORLD\n  bounds 0 0 10 10\nDANIEL 1 1\nROBOT 2 2\n"));
}

TEST_CASE("zero actuation leaves the pose unchanged") {
    ScenarioFixture fx = canonical_fixture();
    World w = World::spawn(fx, 0);
    Vec2 before = w.robot_pose();
    w.step(Actuation{});
    CHECK(w.robot_pose() == before);
    CHECK(w.tick() == 1);
}

TEST_CASE("wall collision clamps and flags") {
    ScenarioFixture fx = canonical_fixture();
    World w = World::spawn(fx, 0);
    StepResult last;
    for (int i = 0; i < 30; ++i) last = w.step(Actuation{{-1.0, 0.0}});
    CHECK(w.robot_pose().x == fx.bounds.x0);
    CHECK(last.collided);
}

TEST_CASE("scripted drive replays to an identical state hash") {
    ScenarioFixture fx = canonical_fixture();
    auto run = [&]() {
        World w = World::spawn(fx, 3);
        for (int i = 0; i < 100; ++i) {
            Actuation a;
            a.move = {(i % 7) * 0.1, ((i * 13) % 5 - 2) * 0.2};
            w.step(a);
        }
        return w.state_hash();
    };
    CHECK(run() == run());
}

TEST_CASE("random walk is seed-deterministic") {
    ScenarioFixture fx = canonical_fixture();
    auto run = [&](uint64_t seed) {
        World w = World::spawn(fx, seed);
        Actuation a;
        a.random_walk = true;
        for (int i = 0; i < 20; ++i) w.step(a);
        return w.state_hash();
    };
    CHECK(run(11) == run(11));
    CHECK(run(11) != run(12));
}

TEST_CASE("grab and release honor the rules") {
    ScenarioFixture fx = canonical_fixture();
    World w = World::spawn(fx, 0);
    SUBCASE("grasp radius violation") {
        Actuation a;
        a.grab = "obj-thermo-new";  // far across the map
        StepResult r = w.step(a);
        CHECK_FALSE(r.grab_ok);
        CHECK(r.error == "grasp-radius violation");
    }
    SUBCASE("empty-gripper drop") {
        Actuation a;
        a.release = "floor";
        StepResult r = w.step(a);
        CHECK_FALSE(r.release_ok);
        CHECK(r.error == "empty-gripper drop");
    }
    SUBCASE("held object tracks the robot and conserves object count") {
        // teleport-by-walking to the new thermostat, then grab
        size_t object_count = w.objects().size();
        const WorldObject* target = w.object("obj-thermo-new");
        REQUIRE(target != nullptr);
        for (int i = 0; i < 60 && distance(w.robot_pose(), target->pose) > 0.4; ++i) {
            Vec2 d = target->pose - w.robot_pose();
            double dist = d.norm();
            w.step(Actuation{d.normalized() * std::min(1.0, dist - 0.35)});
        }
        Actuation grab;
        grab.grab = "obj-thermo-new";
        StepResult r = w.step(grab);
        CHECK(r.grab_ok);
        CHECK(w.gripper_contents() == std::optional<std::string>("obj-thermo-new"));
        w.step(Actuation{{-1.0, 0.0}});
        CHECK(w.object("obj-thermo-new")->pose == w.robot_pose());
        CHECK(w.objects().size() == object_count);
    }
}

TEST_CASE("delivery predicate") {
    ScenarioFixture fx = canonical_fixture();
    World w = World::spawn(fx, 0);
    SUBCASE("initial world undelivered") { CHECK_FALSE(w.is_thermostat_delivered()); }
    SUBCASE("held at daniel's pose does not count; released does") {
        const WorldObject* target = w.object("obj-thermo-new");
        for (int i = 0; i < 60 && distance(w.robot_pose(), target->pose) > 0.4; ++i) {
            Vec2 d = target->pose - w.robot_pose();
            w.step(Actuation{d.normalized() * std::min(1.0, d.norm() - 0.35)});
        }
        Actuation grab;
        grab.grab = "obj-thermo-new";
        REQUIRE(w.step(grab).grab_ok);
        for (int i = 0; i < 60 && distance(w.robot_pose(), fx.daniel) > 0.75; ++i) {
            Vec2 d = fx.daniel - w.robot_pose();
            w.step(Actuation{d.normalized() * std::min(1.0, d.norm() - 0.7)});
        }
        REQUIRE(distance(w.robot_pose(), fx.daniel) <= 1.0);
        CHECK_FALSE(w.is_thermostat_delivered());  // still held
        Actuation drop;
        drop.release = "floor";
        REQUIRE(w.step(drop).release_ok);
        CHECK(w.is_thermostat_delivered());
    }
    SUBCASE("old thermostat near daniel does not satisfy the predicate") {
        // the predicate is specific to the new (age <= 0.1) part
        const WorldObject* old_part = w.object("obj-thermo-old");
        REQUIRE(old_part != nullptr);
        CHECK(old_part->features.at("age").get<double>() > 0.1);
    }
}
