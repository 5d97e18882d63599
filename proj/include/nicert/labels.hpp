#pragma once

#include <iosfwd>
#include <string>

namespace nicert {

// Two-point confidentiality lattice. Low is bottom, High is top.
enum class Label : unsigned char { Low, High };

// What a memory location can carry: a plain label, or a change label that
// remembers that the location moved away from its initial level.
enum class StoredLabel : unsigned char { Low, High, LowToHigh, HighToLow };

Label join(Label a, Label b);

// Project the level a stored value is read at.
Label current(StoredLabel sl);

// New stored label after writing a value of level `next` over `prev`.
// A change label reverts when the original level is written back and
// persists when the changed level is written again.
StoredLabel update(StoredLabel prev, Label next);

// Plain label viewed as a stored label.
StoredLabel stored(Label l);

// join extended to stored operands via `current`.
Label join(StoredLabel a, Label b);

// Renders "Low" / "High" / "Low >> High" / "High >> Low".
std::string to_string(Label l);
std::string to_string(StoredLabel sl);

// Compact codes used by the state codec and certificates: L H LH HL.
std::string code(Label l);
std::string code(StoredLabel sl);
bool label_from_code(const std::string& s, Label& out);
bool stored_from_code(const std::string& s, StoredLabel& out);

std::ostream& operator<<(std::ostream& os, Label l);
std::ostream& operator<<(std::ostream& os, StoredLabel sl);

}  // namespace nicert
