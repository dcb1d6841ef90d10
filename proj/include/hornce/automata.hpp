#pragma once

#include <bitset>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hornce/mosaics.hpp"
#include "hornce/reasoner.hpp"

namespace hornce {

// Label components: 0 ABox part, 1 T1 part, 2 T2 part, 3 padding and root markers of k-ary trees.
struct LabelAtom {
    int comp = 0;
    bool role = false;
    int sym = -1;  // Sym for concepts and markers, Role for roles
};

constexpr int kMaxAtoms = 256;
using Label = std::bitset<kMaxAtoms>;

class Alphabet {
public:
    int add(int comp, bool role, int sym);
    int find(int comp, bool role, int sym) const;
    int concept_atom(int comp, Sym a) const { return find(comp, false, a); }
    int role_atom(int comp, Role r) const { return find(comp, true, r); }
    const std::vector<LabelAtom> &atoms() const { return atoms_; }
    size_t size() const { return atoms_.size(); }
    std::vector<int> of(int comp, bool role) const;
    std::string atom_str(int i) const;
    std::string label_str(const Label &l) const;

private:
    std::vector<LabelAtom> atoms_;
    std::map<std::tuple<int, bool, int>, int> index_;
};

// Individual marker of the ABox component; keeps the root label nonempty.
Sym star_sym();
Sym dbot_sym();
Sym broot_sym();

// Theta_0 = SigmaA (+ inverses, + marker), Theta_i = sig(T_i) + SigmaA + SigmaQ (+ inverses).
std::shared_ptr<const Alphabet> make_alphabet(const Reasoner &R1, const Reasoner &R2, const Signature &sa,
                                              const Signature &sq);

enum class FKind : uint8_t { True, False, And, Or, Ite, Here, UpEx, UpAll, DownEx, DownAll };

// Positive formula over moves. Ite tests a label atom: kids[0] if present, kids[1] otherwise.
struct FNode {
    FKind kind = FKind::True;
    int atom = -1;
    int state = -1;
    int n = 0;
    std::vector<int> kids;
    bool operator<(const FNode &o) const {
        return std::tie(kind, atom, state, n, kids) < std::tie(o.kind, o.atom, o.state, o.n, o.kids);
    }
};

struct TwoWayAutomaton {
    std::shared_ptr<const Alphabet> alpha;
    std::vector<std::string> names;
    std::vector<int> priority;
    std::vector<int> delta;
    std::vector<FNode> f;
    int initial = 0;
    // 0 for counting automata over unranked trees, otherwise the branching bound of a k-ary automaton.
    int k = 0;

    size_t num_states() const { return names.size(); }
    int max_count() const;
    int max_priority() const;
    int state_index(const std::string &name) const;
};

// Incremental construction with hash-consed formulas and states created by name on demand.
class AutomatonBuilder {
public:
    explicit AutomatonBuilder(std::shared_ptr<const Alphabet> alpha);

    int state(const std::string &name, int priority = 0);
    bool has_state(const std::string &name) const { return by_name_.count(name) > 0; }
    void set(int q, int formula);
    bool defined(int q) const { return a_.delta[q] >= 0; }
    void set_initial(int q) { a_.initial = q; }

    int tt();
    int ff();
    int conj(std::vector<int> xs);
    int disj(std::vector<int> xs);
    int ite(int atom, int yes, int no);
    int lit(int atom) { return atom < 0 ? ff() : ite(atom, tt(), ff()); }
    int nlit(int atom) { return atom < 0 ? tt() : ite(atom, ff(), tt()); }
    int here(int q);
    int up_ex(int q);
    int up_all(int q);
    int dia(int n, int q);
    int box(int n, int q);
    // Case split on the exact set of present atoms among 'atoms'; leaf(s) builds the formula for s.
    template <class F>
    int by_set(const std::vector<int> &atoms, F leaf);

    const FNode &node(int i) const { return a_.f[i]; }
    const std::string &name(int q) const { return a_.names[q]; }
    int delta_of(int q) const { return a_.delta[q]; }
    TwoWayAutomaton finish();

private:
    int intern(FNode n);
    template <class F>
    int by_set_rec(const std::vector<int> &atoms, size_t i, std::vector<int> &cur, F &leaf);

    TwoWayAutomaton a_;
    std::map<FNode, int> memo_;
    std::map<std::string, int> by_name_;
};

template <class F>
int AutomatonBuilder::by_set(const std::vector<int> &atoms, F leaf) {
    std::vector<int> cur;
    return by_set_rec(atoms, 0, cur, leaf);
}

template <class F>
int AutomatonBuilder::by_set_rec(const std::vector<int> &atoms, size_t i, std::vector<int> &cur, F &leaf) {
    if (i == atoms.size()) return leaf(cur);
    int no = by_set_rec(atoms, i + 1, cur, leaf);
    cur.push_back(atoms[i]);
    int yes = by_set_rec(atoms, i + 1, cur, leaf);
    cur.pop_back();
    return ite(atoms[i], yes, no);
}

// Formula printed with every label test resolved against l.
std::string residual_str(const TwoWayAutomaton &a, int formula, const Label &l);
std::string formula_str(const TwoWayAutomaton &a, int formula);
std::string dump(const TwoWayAutomaton &a);

struct AutomataContext {
    const Reasoner &R1;
    const Reasoner &R2;
    Signature sa, sq;
    std::shared_ptr<const Alphabet> alpha;
};

AutomataContext make_context(const Reasoner &R1, const Reasoner &R2, const Signature &sa, const Signature &sq);

TwoWayAutomaton build_A1(const AutomataContext &c);
TwoWayAutomaton build_A2(const AutomataContext &c);
TwoWayAutomaton build_A3(const AutomataContext &c);
TwoWayAutomaton build_A4(const AutomataContext &c);
TwoWayAutomaton build_A4_sim(const AutomataContext &c);
TwoWayAutomaton intersect(const std::vector<TwoWayAutomaton> &parts);
TwoWayAutomaton to_2ata_k(const TwoWayAutomaton &a);

// Finite rooted graph whose unfolding from root is the labeled tree.
struct RegularTreeRep {
    std::vector<Label> labels;
    std::vector<std::vector<int>> kids;
    int root = 0;

    int add(const Label &l) {
        labels.push_back(l);
        kids.emplace_back();
        return static_cast<int>(labels.size()) - 1;
    }
    std::string to_json(const Alphabet &alpha) const;
};

bool run_on_regular_tree(const TwoWayAutomaton &a, const RegularTreeRep &t);

// Input tree of a tree-shaped ABox rooted at `root`: the ABox in L0, the unfolded T1 universal model in L1
// and the T2 consequences at the individuals in L2. Empty when the ABox is inconsistent with either TBox.
std::optional<RegularTreeRep> canonical_tree(const AutomataContext &c, const ABox &abox, Sym root);

struct EmptinessLimits {
    size_t max_keys = 200000;
    double seconds = 0;  // 0: unlimited
};

struct EmptinessStats {
    size_t keys = 0;
    size_t evaluations = 0;
    size_t local_solutions = 0;
    size_t outer_rounds = 0;
    double seconds = 0;
};

struct EmptinessResult {
    bool empty = true;
    std::optional<RegularTreeRep> certificate;
    EmptinessStats stats;
};

// Requires priorities in {0,1} and every cycle inside a strongly connected component that contains a
// priority-1 state to pass through one; throws std::invalid_argument otherwise and ResourceLimit on budget.
EmptinessResult is_empty(const TwoWayAutomaton &a, const EmptinessLimits &lim = {});

}  // namespace hornce
