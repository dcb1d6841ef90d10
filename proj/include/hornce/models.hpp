#pragma once

#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "hornce/reasoner.hpp"
#include "hornce/syntax.hpp"

namespace hornce {

struct Interpretation {
    struct Elem {
        std::string name;
        bool individual = false;
        SymSet concepts;
        std::string path;
        int depth = 0;
    };
    std::vector<Elem> elems;
    // (from, role name, to)
    std::set<std::tuple<int, Sym, int>> edges;

    int add(Elem e);
    int find(const std::string &name) const;
    void add_role(int x, Role r, int y);
    std::vector<int> individuals() const;
    std::string to_abox() const;
    std::string to_json() const;
};

Interpretation interpretation_of(const ABox &a);

struct TypeGraph {
    struct Node {
        SymSet type;
        RoleSet rho;
        bool root = false;
    };
    std::vector<Node> nodes;
    // Edge label is the child's incoming role set.
    std::vector<std::vector<std::pair<RoleSet, int>>> kids;
    int root = 0;

    size_t size() const { return nodes.size(); }
    std::vector<std::vector<int>> parents() const;
    std::string to_string() const;
};

Interpretation materialize(const Reasoner &R, const ABox &a, size_t depth);
TypeGraph type_graph(const Reasoner &R, const SymSet &t0);
// Finite prefix of the unfolding; element 0 is the root.
Interpretation unfold(const TypeGraph &g, size_t depth);
// Nodes reachable from the root along edges carrying a signature role, with only those edges.
TypeGraph con_part(const TypeGraph &g, const Signature &s);
Interpretation restrict_con(const Interpretation &I, const Signature &s);
ABox unravel(const ABox &a, Sym ind, size_t depth);

bool hom_into_regular(const Interpretation &src, const TypeGraph &tgt, const Signature &s,
                      std::optional<std::pair<int, int>> anchor = std::nullopt);

// Two-way labelled graph used for simulations. A TypeGraph is read through its quotient by nodes.
struct LGraph {
    std::vector<SymSet> labels;
    std::vector<std::vector<std::pair<Role, int>>> out;
};

LGraph as_lgraph(const Interpretation &I);
LGraph as_lgraph(const TypeGraph &g);
// Greatest S-simulation of src in tgt.
std::set<std::pair<int, int>> max_simulation(const LGraph &src, const LGraph &tgt, const Signature &s);
bool is_simulation(const LGraph &src, const LGraph &tgt, const Signature &s,
                   const std::set<std::pair<int, int>> &rel);
bool sim_check(const LGraph &src, const LGraph &tgt, const Signature &s,
               const std::set<std::pair<int, int>> &anchors);

bool n_bounded_hom_oracle(const TypeGraph &src, const TypeGraph &tgt, const Signature &s, size_t n);

}  // namespace hornce
