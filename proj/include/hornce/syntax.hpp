#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hornce {

// Interned symbol. Concept names, role names, individuals and variables share one table.
using Sym = int;

Sym intern(std::string_view name);
const std::string &sym_name(Sym s);

// A role is 2*name + inverted.
using Role = int;
inline Role mk_role(Sym name, bool inverted = false) { return 2 * name + (inverted ? 1 : 0); }
inline Role inv(Role r) { return r ^ 1; }
inline Sym role_name(Role r) { return r >> 1; }
inline bool is_inv(Role r) { return (r & 1) != 0; }
std::string role_str(Role r);

// Sorted, duplicate-free vectors of ints used for types, role sets and signatures.
using SymSet = std::vector<int>;
using RoleSet = std::vector<int>;

void set_insert(std::vector<int> &s, int x);
bool set_has(const std::vector<int> &s, int x);
bool set_subset(const std::vector<int> &a, const std::vector<int> &b);
std::vector<int> set_union(const std::vector<int> &a, const std::vector<int> &b);
std::vector<int> set_inter(const std::vector<int> &a, const std::vector<int> &b);
std::vector<int> set_minus(const std::vector<int> &a, const std::vector<int> &b);
void set_normalize(std::vector<int> &s);
std::string names_str(const SymSet &s);
std::string roles_str(const RoleSet &s);

struct ParseError : std::runtime_error {
    int line, col;
    ParseError(const std::string &msg, int line, int col);
};

struct ProfileError : std::runtime_error {
    int line;
    ProfileError(const std::string &msg, int line);
};

enum class CKind { Top, Bot, Name, Not, And, Or, Exists, Forall };

struct Concept;
using CPtr = std::shared_ptr<const Concept>;

struct Concept {
    CKind kind;
    Sym name = -1;
    Role role = -1;
    CPtr a, b;
};

CPtr c_top();
CPtr c_bot();
CPtr c_name(Sym a);
CPtr c_not(CPtr c);
CPtr c_and(CPtr x, CPtr y);
CPtr c_or(CPtr x, CPtr y);
CPtr c_some(Role r, CPtr c);
CPtr c_only(Role r, CPtr c);

std::string print_concept(const CPtr &c);
bool concept_equal(const CPtr &x, const CPtr &y);

struct CI {
    CPtr lhs, rhs;
    int line = 0;
};

struct RI {
    Role sub, sup;
    int line = 0;
};

struct TBox {
    std::vector<CI> cis;
    std::vector<RI> ris;
    std::vector<Role> funcs;

    SymSet concept_names() const;
    SymSet role_names() const;
};

enum class Profile { HornALCHIF, ELHIFbot };

TBox parse_tbox(std::string_view text);
std::string print_tbox(const TBox &t);
// Throws ProfileError on the first CI outside the profile.
void check_profile(const TBox &t, Profile p);
bool in_profile(const TBox &t, Profile p);
// Functional roles that have proper subroles once RIs are closed under inversion.
std::vector<std::string> tbox_warnings(const TBox &t);
// Statement-level inclusion, used for the conservative-extension precondition.
bool tbox_subset(const TBox &t1, const TBox &t2);

enum class NKind { TopSub, SubBot, AndSub, SubExists, SubForall };

// TopSub: top <= c.  SubBot: a <= bot.  AndSub: a and b <= c.
// SubExists: a <= some r c.  SubForall: a <= only r c.
struct NCI {
    NKind kind;
    Sym a = -1, b = -1, c = -1;
    Role r = -1;
    bool operator==(const NCI &o) const {
        return kind == o.kind && a == o.a && b == o.b && c == o.c && r == o.r;
    }
    bool operator<(const NCI &o) const;
};

struct NormalTBox {
    std::vector<NCI> cis;
    std::vector<RI> ris;
    std::vector<Role> funcs;
    std::map<Sym, std::string> fresh;

    SymSet concept_names() const;
    SymSet role_names() const;
    bool is_fresh(Sym s) const { return fresh.count(s) > 0; }
};

NormalTBox normalize(const TBox &t);
TBox to_tbox(const NormalTBox &t);
std::string print_nci(const NCI &ci);
std::string print_normal(const NormalTBox &t);

struct ConceptAssertion {
    Sym cname, ind;
};

struct RoleAssertion {
    Sym role;
    Sym a, b;
};

struct ABox {
    std::vector<ConceptAssertion> concepts;
    std::vector<RoleAssertion> roles;

    SymSet individuals() const;
    bool tree_shaped() const;
    void canonicalize();
};

ABox parse_abox(std::string_view text);
std::string print_abox(const ABox &a);

struct Atom {
    bool is_role = false;
    Sym pred = -1;
    Sym x = -1, y = -1;
};

struct CQ {
    std::vector<Sym> answer;
    std::vector<Atom> atoms;

    std::vector<Sym> vars() const;
    bool weakly_tree_shaped() const;
    bool tree_shaped() const;
    bool is_1t() const;
};

CQ parse_cq(std::string_view text);
std::string print_cq(const CQ &q);

struct Signature {
    SymSet concepts;
    SymSet roles;

    bool has_concept(Sym a) const { return set_has(concepts, a); }
    bool has_role(Sym r) const { return set_has(roles, r); }
    bool has_role_any(Role r) const { return set_has(roles, role_name(r)); }
};

Signature parse_signature(std::string_view text);
std::string print_signature(const Signature &s);
Signature signature_of(const NormalTBox &t);
Signature sig_union(const Signature &a, const Signature &b);

}  // namespace hornce
