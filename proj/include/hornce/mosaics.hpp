#pragma once

#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "hornce/models.hpp"
#include "hornce/reasoner.hpp"

namespace hornce {

struct ResourceLimit : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// 1-neighborhood (t-, rho, t, S) of an element; has_pred false stands for t- = rho = bot.
struct Neighborhood {
    bool has_pred = false;
    SymSet tminus;
    RoleSet rho;
    SymSet t;
    std::vector<std::pair<RoleSet, SymSet>> S;

    bool operator<(const Neighborhood &o) const;
    bool operator==(const Neighborhood &o) const;
};

bool nbh_leq(const Neighborhood &a, const Neighborhood &b);
std::vector<Neighborhood> enumerate_neighborhoods(const TypeGraph &g);
std::vector<Neighborhood> enumerate_neighborhoods(const Reasoner &R1, const SymSet &t1);
std::string nbh_str(const Neighborhood &n);

// Labels range over nodes of the T2 type graph that lie in the part reachable from the root
// along signature roles; bit i of a label stands for universe[i].
struct MosaicSpace {
    std::vector<Neighborhood> nbhs;
    TypeGraph tg2;
    std::vector<int> universe;
    Signature sig;

    // Interned T1 types and role sets of the neighborhoods.
    struct Ids {
        int tminus, rho, t;
        std::vector<std::pair<int, int>> S;
    };
    std::vector<Ids> ids;
};

MosaicSpace make_space(const TypeGraph &tg1, const TypeGraph &tg2, const Signature &sig);

// ell[0] labels t-, ell[1] labels t, ell[2 + i] labels S[i].
struct Mosaic {
    int nbh = 0;
    std::vector<uint64_t> ell;
    bool operator<(const Mosaic &o) const { return std::tie(nbh, ell) < std::tie(o.nbh, o.ell); }
    bool operator==(const Mosaic &o) const { return nbh == o.nbh && ell == o.ell; }
};

bool check_condition_M(const MosaicSpace &sp, const Mosaic &m);
bool is_good(const MosaicSpace &sp, const Mosaic &m, const std::vector<Mosaic> &set);

struct MosaicStats {
    size_t candidates = 0;
    size_t initial = 0;
    size_t surviving = 0;
    size_t rounds = 0;
    double bound_log2 = 0;
};

std::vector<Mosaic> enumerate_mosaics(const MosaicSpace &sp, MosaicStats &st, size_t cap = 0);
std::vector<Mosaic> eliminate(const MosaicSpace &sp, std::vector<Mosaic> ms, size_t *rounds = nullptr);

struct FinHomResult {
    bool holds = false;
    MosaicStats stats;
};

// Decides I_{T2,t2} restricted to its sig-connected part maps finitely into I_{T1,t1}.
FinHomResult decide_fin_hom(const TypeGraph &tg1, const TypeGraph &tg2, const Signature &sig, size_t cap = 0);
FinHomResult decide_fin_hom(const Reasoner &R1, const SymSet &t1, const Reasoner &R2, const SymSet &t2,
                            const Signature &sig, size_t cap = 0);

// Types at the root of a maximal Q-subtree: nodes entered by an edge without Q-roles.
std::set<SymSet> compute_RQ(const Reasoner &R2, const SymSet &t, const Signature &q);

std::string mosaics_json(const MosaicSpace &sp, const std::vector<Mosaic> &ms);

}  // namespace hornce
