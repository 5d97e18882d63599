#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>
#include <vector>

#include "nicert/labels.hpp"

using namespace nicert;

namespace {
const Label kLabels[] = {Label::Low, Label::High};
const StoredLabel kStored[] = {StoredLabel::Low, StoredLabel::High, StoredLabel::LowToHigh,
                               StoredLabel::HighToLow};
}

TEST_CASE("join truth table") {
    CHECK(join(Label::Low, Label::Low) == Label::Low);
    CHECK(join(Label::Low, Label::High) == Label::High);
    CHECK(join(Label::High, Label::Low) == Label::High);
    CHECK(join(Label::High, Label::High) == Label::High);
}

TEST_CASE("join is commutative, associative, idempotent, with Low as identity") {
    for (Label a : kLabels) {
        CHECK(join(a, a) == a);
        CHECK(join(a, Label::Low) == a);
        CHECK(join(Label::Low, a) == a);
        for (Label b : kLabels) {
            CHECK(join(a, b) == join(b, a));
            for (Label c : kLabels) CHECK(join(join(a, b), c) == join(a, join(b, c)));
        }
    }
}

TEST_CASE("update table, all eight pairs") {
    // plain labels
    CHECK(update(StoredLabel::Low, Label::Low) == StoredLabel::Low);
    CHECK(update(StoredLabel::High, Label::High) == StoredLabel::High);
    // level changes
    CHECK(update(StoredLabel::Low, Label::High) == StoredLabel::LowToHigh);
    CHECK(update(StoredLabel::High, Label::Low) == StoredLabel::HighToLow);
    // revert rows: writing the original level back
    CHECK(update(StoredLabel::LowToHigh, Label::Low) == StoredLabel::Low);
    CHECK(update(StoredLabel::HighToLow, Label::High) == StoredLabel::High);
    // persist rows: writing the changed level again
    CHECK(update(StoredLabel::LowToHigh, Label::High) == StoredLabel::LowToHigh);
    CHECK(update(StoredLabel::HighToLow, Label::Low) == StoredLabel::HighToLow);
}

TEST_CASE("current projection") {
    CHECK(current(StoredLabel::Low) == Label::Low);
    CHECK(current(StoredLabel::High) == Label::High);
    CHECK(current(StoredLabel::LowToHigh) == Label::High);
    CHECK(current(StoredLabel::HighToLow) == Label::Low);
}

TEST_CASE("current after update equals the written level, all eight pairs") {
    for (StoredLabel sl : kStored)
        for (Label l : kLabels) CHECK(current(update(sl, l)) == l);
}

TEST_CASE("reachability closure from each starting level") {
    auto closure = [](StoredLabel start) {
        std::set<StoredLabel> seen{start};
        std::vector<StoredLabel> work{start};
        while (!work.empty()) {
            StoredLabel s = work.back();
            work.pop_back();
            for (Label l : kLabels) {
                StoredLabel n = update(s, l);
                if (seen.insert(n).second) work.push_back(n);
            }
        }
        return seen;
    };
    CHECK(closure(StoredLabel::Low) ==
          std::set<StoredLabel>{StoredLabel::Low, StoredLabel::LowToHigh});
    CHECK(closure(StoredLabel::High) ==
          std::set<StoredLabel>{StoredLabel::High, StoredLabel::HighToLow});
}

TEST_CASE("rendering matches the tool output format") {
    CHECK(to_string(Label::Low) == "Low");
    CHECK(to_string(Label::High) == "High");
    CHECK(to_string(StoredLabel::LowToHigh) == "Low >> High");
    CHECK(to_string(StoredLabel::HighToLow) == "High >> Low");
    CHECK(to_string(StoredLabel::Low) == "Low");
    CHECK(to_string(StoredLabel::High) == "High");
}

TEST_CASE("compact codes round-trip") {
    for (Label l : kLabels) {
        Label back;
        REQUIRE(label_from_code(code(l), back));
        CHECK(back == l);
    }
    for (StoredLabel sl : kStored) {
        StoredLabel back;
        REQUIRE(stored_from_code(code(sl), back));
        CHECK(back == sl);
    }
    Label dummy;
    CHECK_FALSE(label_from_code("X", dummy));
}

TEST_CASE("join on stored operands goes through current") {
    CHECK(join(StoredLabel::LowToHigh, Label::Low) == Label::High);
    CHECK(join(StoredLabel::HighToLow, Label::Low) == Label::Low);
    for (StoredLabel sl : kStored)
        for (Label l : kLabels) CHECK(join(sl, l) == join(current(sl), l));
}

TEST_CASE("stored lifts plain labels") {
    CHECK(stored(Label::Low) == StoredLabel::Low);
    CHECK(stored(Label::High) == StoredLabel::High);
}
