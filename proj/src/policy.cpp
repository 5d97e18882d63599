#include "nicert/policy.hpp"

#include <functional>
#include <sstream>
#include <vector>

namespace nicert {

namespace {

std::vector<std::string> split_path(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == '.') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

struct TypePath {
    std::string path;
    Type type;
};

// All type-level paths from static roots, instance fields included.
std::vector<TypePath> all_type_paths(const Program& p) {
    std::vector<TypePath> out;
    std::function<void(const std::string&, const Type&, std::vector<int>&)> walk =
        [&](const std::string& path, const Type& t, std::vector<int>& on_chain) {
            out.push_back({path, t});
            if (t.kind != Type::Object) return;
            for (int c : on_chain)
                if (c == t.class_index) return;  // type cycle; not constructible anyway
            on_chain.push_back(t.class_index);
            const ClassDecl& cls = p.classes[t.class_index];
            for (const auto& f : cls.instance_fields)
                walk(path + "." + f.name, f.type, on_chain);
            on_chain.pop_back();
        };
    for (const auto& cls : p.classes) {
        for (const auto& f : cls.static_fields) {
            std::vector<int> chain;
            walk(cls.name + "." + f.name, f.type, chain);
        }
    }
    return out;
}

int find_field(const std::vector<FieldDecl>& v, const std::string& n) {
    for (size_t i = 0; i < v.size(); i++)
        if (v[i].name == n) return static_cast<int>(i);
    return -1;
}

}  // namespace

std::string NIPolicy::canonical() const {
    std::ostringstream os;
    for (const auto& [path, label] : entries) os << path << "=" << to_string(label) << "\n";
    return os.str();
}

NIPolicy extract_policy(const Program& program) {
    NIPolicy policy;
    const std::vector<TypePath> type_paths = all_type_paths(program);

    // expansions first, explicit dotted paths afterwards (they override)
    std::map<std::string, Label> expanded;
    std::map<std::string, Label> explicit_paths;

    auto add = [](std::map<std::string, Label>& m, const std::string& path, Label l,
                  SourcePos pos) {
        auto [it, inserted] = m.insert({path, l});
        if (!inserted && it->second != l)
            throw ParseError(pos, "conflicting labels for '" + path + "'");
    };

    // Appends the chain `segs[from..]` to a path known to hold type `t`.
    auto follow = [&](std::string path, Type t, const std::vector<std::string>& segs,
                      size_t from, SourcePos pos) {
        for (size_t i = from; i < segs.size(); i++) {
            if (t.kind != Type::Object)
                throw ParseError(pos, "'" + path + "' has no field '" + segs[i] + "'");
            const ClassDecl& cls = program.classes[t.class_index];
            int fi = find_field(cls.instance_fields, segs[i]);
            if (fi < 0)
                throw ParseError(pos, "no field '" + segs[i] + "' in class '" + cls.name + "'");
            path += "." + segs[i];
            t = cls.instance_fields[fi].type;
        }
        if (!t.is_scalar())
            throw ParseError(pos, "label annotations must target int or boolean variables");
        return path;
    };

    for (size_t ci = 0; ci < program.classes.size(); ci++) {
        const ClassDecl& cls = program.classes[ci];
        for (const auto& a : cls.annotations) {
            std::vector<std::string> segs = split_path(a.path);
            const std::string& root = segs[0];

            // declared input of main, when main lives in this class
            if (static_cast<int>(ci) == program.main_class) {
                bool is_input = false;
                Type input_type;
                for (const auto& prm : program.inputs())
                    if (prm.name == root) {
                        is_input = true;
                        input_type = prm.type;
                    }
                if (is_input) {
                    if (segs.size() != 1)
                        throw ParseError(a.pos, "input '" + root + "' has no fields");
                    add(explicit_paths, root, a.label, a.pos);
                    continue;
                }
            }

            int fi = find_field(cls.static_fields, root);
            if (fi >= 0) {
                std::string path = follow(cls.name + "." + root, cls.static_fields[fi].type,
                                          segs, 1, a.pos);
                add(explicit_paths, path, a.label, a.pos);
                continue;
            }

            fi = find_field(cls.instance_fields, root);
            if (fi >= 0) {
                // declaration-site annotation: applies wherever this class is
                // reachable from a static root
                for (const auto& tp : type_paths) {
                    if (tp.type.kind == Type::Object &&
                        tp.type.class_index == static_cast<int>(ci)) {
                        std::string path = follow(tp.path + "." + root,
                                                  cls.instance_fields[fi].type, segs, 1, a.pos);
                        add(expanded, path, a.label, a.pos);
                    }
                }
                continue;
            }

            int root_ci = program.class_index(root);
            if (root_ci >= 0 && segs.size() >= 2) {
                int sfi = find_field(program.classes[root_ci].static_fields, segs[1]);
                if (sfi < 0)
                    throw ParseError(a.pos, "no static field '" + segs[1] + "' in class '" +
                                                root + "'");
                std::string path =
                    follow(root + "." + segs[1],
                           program.classes[root_ci].static_fields[sfi].type, segs, 2, a.pos);
                add(explicit_paths, path, a.label, a.pos);
                continue;
            }

            throw ParseError(a.pos, "annotation names undeclared variable '" + a.path + "'");
        }
    }

    policy.entries = std::move(expanded);
    for (const auto& [path, label] : explicit_paths) policy.entries[path] = label;
    return policy;
}

}  // namespace nicert
