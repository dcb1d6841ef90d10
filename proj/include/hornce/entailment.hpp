#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hornce/automata.hpp"
#include "hornce/reasoner.hpp"
#include "hornce/syntax.hpp"

namespace hornce {

enum class Mode { CQ, OneTCQ, Deductive, CQIncons, Conservative, Inseparable };

std::string mode_name(Mode m);
std::optional<Mode> parse_mode(std::string_view s);

struct Problem {
    TBox t1, t2;
    Signature sa, sq;
    Mode mode = Mode::CQ;
    // Entailment notion underlying Conservative and Inseparable.
    Mode base = Mode::CQ;
};

struct Witness {
    ABox abox;
    CQ query;
    std::vector<Sym> answer;
};

struct Options {
    EmptinessLimits limits;
    // Canonical input trees of ABoxes up to this many individuals are tried before the emptiness check.
    size_t probe_individuals = 2;
};

struct Verdict {
    bool entails = true;
    bool ri = true;
    bool profile = true;
    std::string profile_msg;
    // Name of the first failing sub-check ("ri", "fa", "fork", "pipeline", ...); empty when entails.
    std::string reason;
    std::optional<Witness> witness;
    std::optional<RegularTreeRep> certificate;
    // Automaton the certificate was checked against.
    std::shared_ptr<const TwoWayAutomaton> automaton;
    EmptinessStats stats;
    size_t pipeline_runs = 0;
    size_t automaton_states = 0;

    bool precheck_failed() const { return !ri || !profile; }
};

// Raised when conservative-extension mode is used with T1 not a subset of T2.
struct PreconditionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

bool check_ri(const Reasoner &R1, const Reasoner &R2, const Signature &sa, const Signature &sq);
bool check_fa(const Reasoner &R1, const Reasoner &R2, const Signature &sig);
bool decide_universal(const Reasoner &R1, const Signature &sa, const Signature &sq);

Verdict decide_cq_entailment(const NormalTBox &t1, const NormalTBox &t2, const Signature &sa,
                             const Signature &sq, const Options &o = {});
Verdict decide_1tcq_entailment(const NormalTBox &t1, const NormalTBox &t2, const Signature &sa,
                               const Signature &sq, const Options &o = {});
Verdict decide_incons_entailment(const NormalTBox &t1, const NormalTBox &t2, const Signature &sa,
                                 const Options &o = {});
Verdict decide_cq_entailment_incons(const NormalTBox &t1, const NormalTBox &t2, const Signature &sa,
                                    const Signature &sq, const Options &o = {});
// Inputs outside the ELHIF-bot profile yield a verdict with profile == false.
Verdict decide_deductive(const TBox &t1, const TBox &t2, const Signature &sig, const Options &o = {});

// Dispatch on p.mode; throws PreconditionError for conservative mode with T1 not contained in T2.
Verdict decide(const Problem &p, const Options &o = {});

// T with bot replaced by the fresh name `a` and `a` propagated along every role in `roles`.
NormalTBox bot_replaced(const NormalTBox &t, Sym a, const SymSet &roles);

// Tree-shaped SigmaA-ABoxes with at most max_ind individuals a, b, c, ... up to isomorphism, the first
// individual being the root; f returns true to stop.
void enumerate_tree_aboxes(const Signature &sa, size_t max_ind,
                           const std::function<bool(const ABox &, const std::vector<Sym> &)> &f);

// Bounded search over tree-shaped SigmaA-ABoxes with at most max_ind individuals and weakly tree-shaped
// SigmaQ-CQs with at most max_vars variables and at most one answer variable (1tCQs when one_tree).
std::optional<Witness> oracle_witness_search(const Reasoner &R1, const Reasoner &R2, const Signature &sa,
                                             const Signature &sq, size_t max_ind, size_t max_vars,
                                             bool one_tree);

// ABox consistent with both, answer certain under T2 and not under T1.
bool replay(const Reasoner &R1, const Reasoner &R2, const Witness &w);

std::string witness_json(const Witness &w);
std::string verdict_json(const Verdict &v, Mode mode, bool with_certificate);

}  // namespace hornce
