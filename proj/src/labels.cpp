#include "nicert/labels.hpp"

#include <ostream>

namespace nicert {

Label join(Label a, Label b) {
    return (a == Label::Low && b == Label::Low) ? Label::Low : Label::High;
}

Label current(StoredLabel sl) {
    switch (sl) {
    case StoredLabel::Low: return Label::Low;
    case StoredLabel::High: return Label::High;
    case StoredLabel::LowToHigh: return Label::High;
    case StoredLabel::HighToLow: return Label::Low;
    }
    return Label::Low;
}

StoredLabel update(StoredLabel prev, Label next) {
    switch (prev) {
    case StoredLabel::Low:
        return next == Label::Low ? StoredLabel::Low : StoredLabel::LowToHigh;
    case StoredLabel::High:
        return next == Label::High ? StoredLabel::High : StoredLabel::HighToLow;
    case StoredLabel::LowToHigh:
        // original level written back -> revert; changed level -> persist
        return next == Label::Low ? StoredLabel::Low : StoredLabel::LowToHigh;
    case StoredLabel::HighToLow:
        return next == Label::High ? StoredLabel::High : StoredLabel::HighToLow;
    }
    return prev;
}

StoredLabel stored(Label l) {
    return l == Label::Low ? StoredLabel::Low : StoredLabel::High;
}

Label join(StoredLabel a, Label b) {
    return join(current(a), b);
}

std::string to_string(Label l) {
    return l == Label::Low ? "Low" : "High";
}

std::string to_string(StoredLabel sl) {
    switch (sl) {
    case StoredLabel::Low: return "Low";
    case StoredLabel::High: return "High";
    case StoredLabel::LowToHigh: return "Low >> High";
    case StoredLabel::HighToLow: return "High >> Low";
    }
    return "?";
}

std::string code(Label l) {
    return l == Label::Low ? "L" : "H";
}

std::string code(StoredLabel sl) {
    switch (sl) {
    case StoredLabel::Low: return "L";
    case StoredLabel::High: return "H";
    case StoredLabel::LowToHigh: return "LH";
    case StoredLabel::HighToLow: return "HL";
    }
    return "?";
}

bool label_from_code(const std::string& s, Label& out) {
    if (s == "L") { out = Label::Low; return true; }
    if (s == "H") { out = Label::High; return true; }
    return false;
}

bool stored_from_code(const std::string& s, StoredLabel& out) {
    if (s == "L") { out = StoredLabel::Low; return true; }
    if (s == "H") { out = StoredLabel::High; return true; }
    if (s == "LH") { out = StoredLabel::LowToHigh; return true; }
    if (s == "HL") { out = StoredLabel::HighToLow; return true; }
    return false;
}

std::ostream& operator<<(std::ostream& os, Label l) { return os << to_string(l); }
std::ostream& operator<<(std::ostream& os, StoredLabel sl) { return os << to_string(sl); }

}  // namespace nicert
