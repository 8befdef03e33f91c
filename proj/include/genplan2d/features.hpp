#ifndef GENPLAN2D_FEATURES_HPP
#define GENPLAN2D_FEATURES_HPP

#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "genplan2d/ground.hpp"
#include "genplan2d/sexpr.hpp"

namespace genplan2d {

// ---------------------------------------------------------------------------
// Qualitative values
// ---------------------------------------------------------------------------

enum class QualValue { EQ0, GT0 };
enum class QualDelta { DEC, INC, NOCHANGE };

inline QualValue qual_of(long v) { return v == 0 ? QualValue::EQ0 : QualValue::GT0; }
inline QualDelta delta_of(long a, long b) {
    if (b < a) return QualDelta::DEC;
    if (b > a) return QualDelta::INC;
    return QualDelta::NOCHANGE;
}

// Boolean features print through the same lattice: FALSE=EQ0, TRUE=GT0,
// SET=INC, UNSET=DEC.
inline std::string qual_to_string(QualValue v, bool boolean_kind = false) {
    if (boolean_kind) return v == QualValue::EQ0 ? "false" : "true";
    return v == QualValue::EQ0 ? "=0" : ">0";
}
inline std::string delta_to_string(QualDelta d, bool boolean_kind = false) {
    switch (d) {
        case QualDelta::DEC: return boolean_kind ? "unset" : "dec";
        case QualDelta::INC: return boolean_kind ? "set" : "inc";
        case QualDelta::NOCHANGE: return "nc";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Concept AST
// ---------------------------------------------------------------------------

/*
  Concepts are built from +/- predicate literals over variables by
  conjunction and a single implication. Canonical form: And nodes are
  flattened, deduplicated and sorted; an implication appears at most once,
  either as the whole concept or as one conjunct; implication sides are
  literals or pure conjunctions.
*/
struct ConceptNode {
    enum class Kind { Lit, And, Implies };
    Kind kind = Kind::Lit;
    int pred = -1;           // Lit
    bool negated = false;    // Lit
    std::vector<int> args;   // Lit: variable ids
    std::vector<ConceptNode> children;  // And / Implies (exactly 2)

    bool operator==(const ConceptNode &o) const {
        return kind == o.kind && pred == o.pred && negated == o.negated && args == o.args &&
               children == o.children;
    }
};

enum class Quant { Exists, Forall };

/*
  A feature counts the entities that can fill variable 0 such that the
  quantified concept holds. Variables are canonically numbered: 0 is free,
  1..k follow the quantifier prefix order, so `prefix[i]` quantifies
  variable i+1.
*/
struct Feature {
    ConceptNode expr;
    std::vector<ArgSort> var_sorts;
    std::vector<Quant> prefix;
    int complexity = 0;
    std::string repr;

    int var_count() const { return static_cast<int>(var_sorts.size()); }
    bool operator==(const Feature &o) const { return repr == o.repr; }
};

// ---------------------------------------------------------------------------
// Canonicalization and printing
// ---------------------------------------------------------------------------

namespace detail_feat {

inline void concept_repr(const Domain &d, const ConceptNode &n, std::string &out) {
    switch (n.kind) {
        case ConceptNode::Kind::Lit: {
            if (n.negated) out += "(not ";
            out += "(" + d.pred(n.pred).name;
            for (int a : n.args) out += " ?x" + std::to_string(a);
            out += ")";
            if (n.negated) out += ")";
            break;
        }
        case ConceptNode::Kind::And: {
            out += "(and";
            for (const auto &c : n.children) {
                out += " ";
                concept_repr(d, c, out);
            }
            out += ")";
            break;
        }
        case ConceptNode::Kind::Implies: {
            out += "(implies ";
            concept_repr(d, n.children[0], out);
            out += " ";
            concept_repr(d, n.children[1], out);
            out += ")";
            break;
        }
    }
}

inline std::string concept_string(const Domain &d, const ConceptNode &n) {
    std::string s;
    concept_repr(d, n, s);
    return s;
}

inline void rename_vars(ConceptNode &n, const std::vector<int> &map) {
    if (n.kind == ConceptNode::Kind::Lit) {
        for (int &a : n.args) a = map[static_cast<size_t>(a)];
    } else {
        for (auto &c : n.children) rename_vars(c, map);
    }
}

// Flattens nested conjunctions, removes duplicate conjuncts, orders children
// deterministically. Variable names must already be fixed.
inline ConceptNode normalize(const Domain &d, ConceptNode n) {
    if (n.kind == ConceptNode::Kind::Lit) return n;
    if (n.kind == ConceptNode::Kind::Implies) {
        n.children[0] = normalize(d, std::move(n.children[0]));
        n.children[1] = normalize(d, std::move(n.children[1]));
        return n;
    }
    std::vector<ConceptNode> flat;
    std::function<void(ConceptNode &&)> collect = [&](ConceptNode &&c) {
        if (c.kind == ConceptNode::Kind::And) {
            for (auto &gc : c.children) collect(std::move(gc));
        } else {
            flat.push_back(normalize(d, std::move(c)));
        }
    };
    for (auto &c : n.children) collect(std::move(c));
    std::sort(flat.begin(), flat.end(), [&](const ConceptNode &a, const ConceptNode &b) {
        return concept_string(d, a) < concept_string(d, b);
    });
    flat.erase(std::unique(flat.begin(), flat.end()), flat.end());
    if (flat.size() == 1) return flat[0];
    ConceptNode out;
    out.kind = ConceptNode::Kind::And;
    out.children = std::move(flat);
    return out;
}

inline void collect_vars(const ConceptNode &n, std::set<int> &vars) {
    if (n.kind == ConceptNode::Kind::Lit) {
        vars.insert(n.args.begin(), n.args.end());
    } else {
        for (const auto &c : n.children) collect_vars(c, vars);
    }
}

inline int count_implications(const ConceptNode &n) {
    if (n.kind == ConceptNode::Kind::Lit) return 0;
    int c = n.kind == ConceptNode::Kind::Implies ? 1 : 0;
    for (const auto &ch : n.children) c += count_implications(ch);
    return c;
}

}  // namespace detail_feat

inline std::string feature_repr(const Domain &d, const ConceptNode &c,
                                const std::vector<Quant> &prefix,
                                const std::vector<ArgSort> &sorts) {
    std::string s = "(count ?x0";
    size_t i = 0;
    int open = 0;
    while (i < prefix.size()) {
        size_t j = i;
        while (j < prefix.size() && prefix[j] == prefix[i]) ++j;
        s += prefix[i] == Quant::Exists ? " (exists (" : " (forall (";
        for (size_t v = i; v < j; ++v) {
            if (v > i) s += " ";
            s += "?x" + std::to_string(v + 1) + " " +
                 (sorts[v + 1] == ArgSort::Obj ? "obj" : "pose");
        }
        s += ")";
        ++open;
        i = j;
    }
    s += " " + detail_feat::concept_string(d, c);
    for (int k = 0; k < open; ++k) s += ")";
    s += ")";
    return s;
}

/*
  Builds the canonical feature for (concept, free variable, ordered
  quantifier prefix). Adjacent same-quantifier variables commute, so all
  within-block orders are tried and the lexicographically smallest rendering
  wins. Returns false if the free variable does not occur in the concept.
*/
inline bool make_canonical_feature(const Domain &d, const ConceptNode &expr,
                                   const std::vector<ArgSort> &var_sorts, int free_var,
                                   const std::vector<std::pair<Quant, int>> &prefix,
                                   Feature &out) {
    std::set<int> used;
    detail_feat::collect_vars(expr, used);
    if (!used.count(free_var)) return false;
    if (used.size() != prefix.size() + 1) return false;  // every var quantified or free

    // blocks of equal quantifier
    std::vector<std::pair<Quant, std::vector<int>>> blocks;
    for (const auto &[q, v] : prefix) {
        if (blocks.empty() || blocks.back().first != q) blocks.push_back({q, {}});
        blocks.back().second.push_back(v);
    }

    std::string best;
    Feature best_feature;
    std::vector<std::vector<int>> block_orders;
    std::function<void(size_t)> rec = [&](size_t bi) {
        if (bi == blocks.size()) {
            std::vector<int> order;  // old var ids in prefix order
            for (const auto &b : block_orders)
                order.insert(order.end(), b.begin(), b.end());
            std::vector<int> map(var_sorts.size(), -1);
            map[static_cast<size_t>(free_var)] = 0;
            std::vector<ArgSort> sorts(order.size() + 1);
            sorts[0] = var_sorts[static_cast<size_t>(free_var)];
            std::vector<Quant> quants(order.size());
            for (size_t i = 0; i < order.size(); ++i) {
                map[static_cast<size_t>(order[i])] = static_cast<int>(i) + 1;
                sorts[i + 1] = var_sorts[static_cast<size_t>(order[i])];
            }
            size_t qi = 0;
            for (const auto &b : blocks)
                for (size_t j = 0; j < b.second.size(); ++j) quants[qi++] = b.first;
            ConceptNode c = expr;
            detail_feat::rename_vars(c, map);
            c = detail_feat::normalize(d, std::move(c));
            std::string repr = feature_repr(d, c, quants, sorts);
            if (best.empty() || repr < best) {
                best = repr;
                best_feature.expr = std::move(c);
                best_feature.var_sorts = std::move(sorts);
                best_feature.prefix = std::move(quants);
                best_feature.repr = best;
            }
            return;
        }
        std::vector<int> vars = blocks[bi].second;
        std::sort(vars.begin(), vars.end());
        do {
            block_orders.push_back(vars);
            rec(bi + 1);
            block_orders.pop_back();
        } while (std::next_permutation(vars.begin(), vars.end()));
    };
    rec(0);
    out = std::move(best_feature);
    return true;
}

// ---------------------------------------------------------------------------
// Complexity
// ---------------------------------------------------------------------------

/*
  Rule-application count R: a literal costs 1; each pairwise conjunction or
  implication adds a level (flattened conjunctions cost their optimal
  pairwise merge height); the concept-promotion row adds 1 unless the top
  node is the implication row; the feature row adds 1. Quantifier rows are
  free. Feature complexity = max(R, number of variables).
*/
namespace detail_feat {

inline int tree_height(const ConceptNode &n) {
    switch (n.kind) {
        case ConceptNode::Kind::Lit: return 1;
        case ConceptNode::Kind::Implies:
            return std::max(tree_height(n.children[0]), tree_height(n.children[1])) + 1;
        case ConceptNode::Kind::And: {
            long sum = 0;
            for (const auto &c : n.children) sum += 1L << tree_height(c);
            int h = 0;
            while ((1L << h) < sum) ++h;
            return h;
        }
    }
    return 1;
}

}  // namespace detail_feat

inline int concept_rule_count(const ConceptNode &n) {
    int r = detail_feat::tree_height(n) + 1;  // + feature row
    if (n.kind != ConceptNode::Kind::Implies) r += 1;  // + promotion row
    return r;
}

inline int feature_complexity(const Feature &f) {
    return std::max(concept_rule_count(f.expr), f.var_count());
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

namespace detail_feat {

struct LitRef {
    const ConceptNode *lit;
    bool in_impl_lhs = false;
    bool in_impl_rhs = false;
};

struct ConceptShape {
    std::vector<const ConceptNode *> pure;      // +/- top-level literal conjuncts
    const ConceptNode *impl = nullptr;          // at most one
    std::vector<const ConceptNode *> lhs, rhs;  // literals of the implication sides
};

inline void gather_lits(const ConceptNode &n, std::vector<const ConceptNode *> &out) {
    if (n.kind == ConceptNode::Kind::Lit) {
        out.push_back(&n);
    } else {
        for (const auto &c : n.children) gather_lits(c, out);
    }
}

inline ConceptShape shape_of(const ConceptNode &root) {
    ConceptShape s;
    auto add_top = [&](const ConceptNode &c) {
        if (c.kind == ConceptNode::Kind::Implies) {
            s.impl = &c;
            gather_lits(c.children[0], s.lhs);
            gather_lits(c.children[1], s.rhs);
        } else if (c.kind == ConceptNode::Kind::Lit) {
            s.pure.push_back(&c);
        } else {
            for (const auto &gc : c.children) {
                if (gc.kind == ConceptNode::Kind::Implies) {
                    s.impl = &gc;
                    gather_lits(gc.children[0], s.lhs);
                    gather_lits(gc.children[1], s.rhs);
                } else {
                    s.pure.push_back(&gc);
                }
            }
        }
    };
    add_top(root);
    return s;
}

/*
  Exact recursive evaluator. At every quantifier the variable only ranges
  over the entities that appear, consistently with the current partial
  binding, in some atom of a literal mentioning that variable, plus one
  representative for all remaining entities: a value matching no such atom
  gives every literal containing the variable the same truth value under any
  extension of the binding, so all such values are interchangeable.
*/
class Evaluator {
public:
    Evaluator(const StateIndex &index, const Feature &f)
        : index_(index), ctx_(*index.state().ctx), f_(f), shape_(shape_of(f.expr)),
          binding_(f.var_sorts.size(), -1) {
        for (const ConceptNode *lit : shape_.pure) lits_.push_back(lit);
        for (const ConceptNode *lit : shape_.lhs) lits_.push_back(lit);
        for (const ConceptNode *lit : shape_.rhs) lits_.push_back(lit);
        var_lits_.resize(f.var_sorts.size());
        for (const ConceptNode *lit : lits_)
            for (int a : lit->args)
                if (std::find(var_lits_[static_cast<size_t>(a)].begin(),
                              var_lits_[static_cast<size_t>(a)].end(),
                              lit) == var_lits_[static_cast<size_t>(a)].end())
                    var_lits_[static_cast<size_t>(a)].push_back(lit);
    }

    long count() {
        const std::vector<int> &domain = ctx_.domain_of(f_.var_sorts[0]);
        std::vector<int> cands = candidates(0);
        long n = 0;
        for (int e : cands) {
            binding_[0] = e;
            if (eval_prefix(0)) ++n;
        }
        if (cands.size() < domain.size()) {
            binding_[0] = representative(domain, cands);
            if (eval_prefix(0)) n += static_cast<long>(domain.size() - cands.size());
        }
        binding_[0] = -1;
        return n;
    }

private:
    // Matches of `lit` consistent with the current binding, projected to
    // `var` (sorted, deduplicated). Negation is irrelevant here: matching
    // atoms are exactly the values where the literal's truth can deviate.
    void matches(const ConceptNode &lit, int var, std::vector<int> &out) const {
        size_t n = index_.count(lit.pred);
        for (size_t i = 0; i < n; ++i) {
            const DecodedAtom &atom = index_.at(lit.pred, i);
            int val = -1;
            bool ok = true;
            for (size_t j = 0; j < lit.args.size() && ok; ++j) {
                int v = lit.args[j];
                if (v == var) {
                    if (val < 0) val = atom[j];
                    else ok = val == atom[j];
                } else if (binding_[static_cast<size_t>(v)] >= 0) {
                    ok = binding_[static_cast<size_t>(v)] == atom[j];
                }
            }
            if (ok && val >= 0) out.push_back(val);
        }
    }

    std::vector<int> candidates(int var) const {
        std::vector<int> out;
        for (const ConceptNode *lit : var_lits_[static_cast<size_t>(var)])
            matches(*lit, var, out);
        sort_unique(out);
        return out;
    }

    static int representative(const std::vector<int> &domain, const std::vector<int> &cands) {
        for (int e : domain)
            if (!std::binary_search(cands.begin(), cands.end(), e)) return e;
        return domain.empty() ? -1 : domain[0];
    }

    bool eval_prefix(size_t qi) {
        if (qi == f_.prefix.size()) return eval_concept();
        int var = static_cast<int>(qi) + 1;
        const std::vector<int> &domain = ctx_.domain_of(f_.var_sorts[static_cast<size_t>(var)]);
        std::vector<int> cands = candidates(var);
        bool result;
        if (f_.prefix[qi] == Quant::Exists) {
            result = false;
            for (int e : cands) {
                binding_[static_cast<size_t>(var)] = e;
                if (eval_prefix(qi + 1)) {
                    result = true;
                    break;
                }
            }
            if (!result && cands.size() < domain.size()) {
                binding_[static_cast<size_t>(var)] = representative(domain, cands);
                result = eval_prefix(qi + 1);
            }
        } else {
            result = true;
            for (int e : cands) {
                binding_[static_cast<size_t>(var)] = e;
                if (!eval_prefix(qi + 1)) {
                    result = false;
                    break;
                }
            }
            if (result && cands.size() < domain.size()) {
                binding_[static_cast<size_t>(var)] = representative(domain, cands);
                result = eval_prefix(qi + 1);
            }
        }
        binding_[static_cast<size_t>(var)] = -1;
        return result;
    }

    bool lit_holds(const ConceptNode &lit) const {
        int args[kMaxArity];
        for (size_t i = 0; i < lit.args.size(); ++i)
            args[i] = binding_[static_cast<size_t>(lit.args[i])];
        bool truth = index_.state().holds(
            atom_code(lit.pred, args, static_cast<int>(lit.args.size())));
        return lit.negated ? !truth : truth;
    }

    bool eval_concept() const {
        for (const ConceptNode *lit : shape_.pure)
            if (!lit_holds(*lit)) return false;
        if (shape_.impl) {
            bool lhs = true;
            for (const ConceptNode *lit : shape_.lhs)
                if (!lit_holds(*lit)) {
                    lhs = false;
                    break;
                }
            if (lhs) {
                for (const ConceptNode *lit : shape_.rhs)
                    if (!lit_holds(*lit)) return false;
            }
        }
        return true;
    }

    const StateIndex &index_;
    const StaticContext &ctx_;
    const Feature &f_;
    ConceptShape shape_;
    std::vector<const ConceptNode *> lits_;
    std::vector<std::vector<const ConceptNode *>> var_lits_;
    std::vector<int> binding_;
};

}  // namespace detail_feat

inline long evaluate(const Feature &f, const StateIndex &index) {
    detail_feat::Evaluator ev(index, f);
    return ev.count();
}

inline long evaluate(const Feature &f, const GroundState &s) {
    StateIndex index(s);
    return evaluate(f, index);
}

inline QualValue qual(const Feature &f, const GroundState &s) { return qual_of(evaluate(f, s)); }

inline QualDelta delta(const Feature &f, const GroundState &s, const GroundState &s2) {
    return delta_of(evaluate(f, s), evaluate(f, s2));
}

// ---------------------------------------------------------------------------
// Canonical notation parser
// ---------------------------------------------------------------------------

namespace detail_feat {

inline int var_index(const std::string &tok) {
    if (tok.size() < 3 || tok[0] != '?' || tok[1] != 'x')
        throw std::runtime_error("bad variable token '" + tok + "'");
    return std::stoi(tok.substr(2));
}

inline ConceptNode parse_concept_sexpr(const Domain &d, const Sexpr &e,
                                       std::vector<ArgSort> &sorts) {
    ConceptNode n;
    const std::string &head = e.head();
    if (head == "and") {
        n.kind = ConceptNode::Kind::And;
        for (size_t i = 1; i < e.size(); ++i)
            n.children.push_back(parse_concept_sexpr(d, e[i], sorts));
        return n;
    }
    if (head == "implies") {
        n.kind = ConceptNode::Kind::Implies;
        n.children.push_back(parse_concept_sexpr(d, e.items.at(1), sorts));
        n.children.push_back(parse_concept_sexpr(d, e.items.at(2), sorts));
        return n;
    }
    bool neg = head == "not";
    const Sexpr &lit = neg ? e.items.at(1) : e;
    n.kind = ConceptNode::Kind::Lit;
    n.negated = neg;
    n.pred = d.pred_id(lit.head());
    if (n.pred < 0) throw std::runtime_error("unknown predicate '" + lit.head() + "'");
    const PredicateSchema &ps = d.pred(n.pred);
    for (size_t i = 1; i < lit.size(); ++i) {
        int v = var_index(lit[i].atom);
        if (static_cast<size_t>(v) >= sorts.size())
            sorts.resize(static_cast<size_t>(v) + 1, ArgSort::Obj);
        sorts[static_cast<size_t>(v)] = ps.sig[i - 1];
        n.args.push_back(v);
    }
    return n;
}

}  // namespace detail_feat

inline Feature parse_feature(const Domain &d, const std::string &text) {
    SexprReader reader(text);
    Sexpr top = reader.read();
    if (top.head() != "count") throw std::runtime_error("feature must start with (count ...)");
    Feature f;
    std::vector<ArgSort> sorts;
    const Sexpr *body = &top.items.at(2);
    std::vector<Quant> prefix;
    while (body->head() == "exists" || body->head() == "forall") {
        Quant q = body->head() == "exists" ? Quant::Exists : Quant::Forall;
        const Sexpr &vars = body->items.at(1);
        for (size_t i = 0; i + 1 < vars.size(); i += 2) {
            int v = detail_feat::var_index(vars[i].atom);
            if (static_cast<size_t>(v) >= sorts.size())
                sorts.resize(static_cast<size_t>(v) + 1, ArgSort::Obj);
            sorts[static_cast<size_t>(v)] =
                vars[i + 1].atom == "pose" ? ArgSort::Pose : ArgSort::Obj;
            if (v != static_cast<int>(prefix.size()) + 1)
                throw std::runtime_error("feature variables must be numbered in prefix order");
            prefix.push_back(q);
        }
        body = &body->items.at(2);
    }
    f.expr = detail_feat::parse_concept_sexpr(d, *body, sorts);
    f.var_sorts = sorts;
    f.prefix = prefix;
    f.expr = detail_feat::normalize(d, std::move(f.expr));
    f.repr = feature_repr(d, f.expr, f.prefix, f.var_sorts);
    f.complexity = feature_complexity(f);
    return f;
}

}  // namespace genplan2d

#endif
