#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <set>

#include "hornce/syntax.hpp"

namespace hornce {

// Marker symbol for an inconsistent type. "bot" is a keyword, so it never names a concept.
Sym bot_sym();

struct InconsistentABox : std::runtime_error {
    InconsistentABox() : std::runtime_error("ABox is inconsistent with the TBox") {}
};

// A successor in a regular presentation: the edge roles (closed under role inclusion) and the type.
struct Succ {
    RoleSet rho;
    SymSet type;
    bool operator<(const Succ &o) const { return std::tie(rho, type) < std::tie(o.rho, o.type); }
    bool operator==(const Succ &o) const { return rho == o.rho && type == o.type; }
};

struct ChaseResult {
    std::map<Sym, SymSet> tp;
    // Role edges between individuals, both directions, closed under role inclusion.
    std::set<std::tuple<Sym, Role, Sym>> edges;
    bool consistent = true;
};

class Reasoner {
public:
    explicit Reasoner(NormalTBox t);

    const NormalTBox &tbox() const { return t_; }
    const SymSet &concepts() const { return concepts_; }
    // rol(T): every role name of T together with its inverse.
    const RoleSet &roles() const { return roles_; }

    bool role_sub(Role r, Role s) const;
    RoleSet up(Role r) const;
    RoleSet up(const RoleSet &rs) const;
    bool is_func(Role r) const;
    // Some functional f with r below f.
    bool below_func(Role r) const;

    SymSet type_of(const SymSet &seed) const;
    bool subsumes(const SymSet &t, Sym a) const;
    bool consistent(const SymSet &t) const;
    std::vector<SymSet> succ(const SymSet &t, Role r) const;
    // Successors of an element with type t entered via rho_in (empty for a root), after the
    // functionality proviso and removal of dominated successors.
    std::vector<Succ> children(const SymSet &t, const RoleSet &rho_in) const;

    ChaseResult chase(const ABox &a) const;
    bool abox_consistent(const ABox &a) const;
    bool instance(const ABox &a, Sym ind, Sym c) const;
    std::vector<SymSet> abox_succ(const ABox &a, Sym ind, Role r) const;
    std::vector<Succ> abox_children(const ChaseResult &ch, Sym ind) const;
    std::set<std::vector<Sym>> certain_answers(const ABox &a, const CQ &q) const;
    bool entails(const ABox &a, const CQ &q, const std::vector<Sym> &tuple) const;

    // Closure under the local rules only (top, conjunction, bottom).
    SymSet close_local(SymSet x) const;
    size_t expand_nodes() const;

private:
    struct Key {
        SymSet seed;
        SymSet parent;
        RoleSet edge;
        bool root;
        bool operator<(const Key &o) const {
            return std::tie(root, seed, parent, edge) < std::tie(o.root, o.seed, o.parent, o.edge);
        }
    };
    struct Val {
        SymSet type;
        SymSet back;
        RoleSet extra;
        std::vector<std::pair<RoleSet, int>> kids;
    };

    NormalTBox t_;
    SymSet concepts_;
    RoleSet roles_;
    std::set<std::pair<Role, Role>> sub_;
    RoleSet funcs_;
    std::map<Sym, std::vector<const NCI *>> by_lhs_;
    std::vector<Sym> tops_;

    mutable std::mutex mu_;
    mutable std::map<Key, int> index_;
    mutable std::vector<Key> keys_;
    mutable std::vector<Val> vals_;
    mutable std::vector<std::vector<int>> users_;
    mutable std::vector<char> evaluated_;

    int node(const Key &k) const;
    bool evaluate(int id, std::vector<int> &work, std::vector<char> &queued) const;
    int solve_root(const SymSet &seed) const;
    SymSet fwd(const SymSet &x, const RoleSet &edge) const;
};

std::vector<Succ> prune_dominated(std::vector<Succ> v);
std::vector<SymSet> maximal_sets(std::vector<SymSet> v);

}  // namespace hornce
