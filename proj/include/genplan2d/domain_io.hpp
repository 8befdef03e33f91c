#ifndef GENPLAN2D_DOMAIN_IO_HPP
#define GENPLAN2D_DOMAIN_IO_HPP

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "genplan2d/domain.hpp"
#include "genplan2d/sexpr.hpp"

namespace genplan2d {

/*
  Domain and problem file format (s-expressions, ';' comments):

  (define (domain NAME)
    (:predicates
      (:fluent (on obj pose obj) ...)
      (:static (movable obj) ...)
      (:certified (pose obj pose obj) ...))
    (:action NAME
      :params (?o obj ?p pose ...)
      :pre ((atom ...) ...)
      :pre-neg (...)
      :forall ((:vars (?v sort ...) :when ((guard ...) ...) :must [ (atom) | (not (atom)) ]) ...)
      :eff (...)
      :eff-neg (...))
    (:stream NAME
      :inputs (?o obj ...) :outputs (?p ...)
      :domain ((static-atom ...) ...)
      :certified ((atom ...) ...)
      :proc [placement|collision|traj]))

  (define (problem NAME)
    (:domain NAME)
    (:objects a b c ...)
    (:sampled (name x y frame) ...)
    (:geom (extent e hw hh) ...
           (surface e kind frame cx cy hw hh) ...
           (robot x y) (table-frame e))
    (:init (atom ...) ...)
    (:goal (and CONJUNCT ...)))

  Goal conjuncts: ground literal, (not lit), (exists (?v sort ...) (and lit ...)),
  or (forall (?v sort ...) (when (and atom ...) INNER)) with INNER one of the
  first three forms.
*/

inline ArgSort parse_sort(const std::string &s, const Sexpr &at) {
    if (s == "obj") return ArgSort::Obj;
    if (s == "pose") return ArgSort::Pose;
    throw parse_error("unknown sort '" + s + "'", at.line, at.col);
}

inline std::string sort_name(ArgSort s) { return s == ArgSort::Obj ? "obj" : "pose"; }

namespace detail {

struct VarScope {
    std::vector<std::string> names;
    std::vector<ArgSort> sorts;
    int find(const std::string &n) const {
        for (size_t i = 0; i < names.size(); ++i)
            if (names[i] == n) return static_cast<int>(i);
        return -1;
    }
    int add(const std::string &n, ArgSort s) {
        names.push_back(n);
        sorts.push_back(s);
        return static_cast<int>(names.size()) - 1;
    }
};

inline void parse_var_list(const Sexpr &list, VarScope &scope) {
    if (list.size() % 2 != 0)
        throw parse_error("variable list must alternate ?name sort", list.line, list.col);
    for (size_t i = 0; i < list.size(); i += 2) {
        const std::string &n = list[i].atom;
        if (n.empty() || n[0] != '?')
            throw parse_error("variable must start with '?'", list[i].line, list[i].col);
        scope.add(n, parse_sort(list[i + 1].atom, list[i + 1]));
    }
}

inline AtomTemplate parse_atom_template(const Sexpr &e, const Domain &d, const VarScope &scope,
                                        const std::map<std::string, int> *entity_ids) {
    if (e.is_atom || e.items.empty() || !e.items[0].is_atom)
        throw parse_error("expected (predicate args...)", e.line, e.col);
    AtomTemplate tpl;
    tpl.pred = d.pred_id(e.items[0].atom);
    if (tpl.pred < 0)
        throw parse_error("undeclared predicate '" + e.items[0].atom + "'", e.line, e.col);
    const PredicateSchema &ps = d.pred(tpl.pred);
    if (static_cast<int>(e.size()) - 1 != ps.arity())
        throw parse_error("predicate '" + ps.name + "' expects " + std::to_string(ps.arity()) +
                              " arguments",
                          e.line, e.col);
    for (size_t i = 1; i < e.size(); ++i) {
        const std::string &tok = e[i].atom;
        if (!tok.empty() && tok[0] == '?') {
            int v = scope.find(tok);
            if (v < 0) throw parse_error("unbound variable '" + tok + "'", e[i].line, e[i].col);
            if (scope.sorts[static_cast<size_t>(v)] != ps.sig[i - 1])
                throw parse_error("variable '" + tok + "' used at sort-mismatched position",
                                  e[i].line, e[i].col);
            tpl.args.push_back(term_var(v));
        } else {
            if (!entity_ids)
                throw parse_error("constants not allowed here", e[i].line, e[i].col);
            auto it = entity_ids->find(tok);
            if (it == entity_ids->end())
                throw parse_error("unknown entity '" + tok + "'", e[i].line, e[i].col);
            tpl.args.push_back(term_const(it->second));
        }
    }
    return tpl;
}

inline const Sexpr *find_key(const Sexpr &form, const std::string &key) {
    for (size_t i = 0; i + 1 < form.size(); ++i) {
        if (form[i].is_atom && form[i].atom == key) return &form[i + 1];
    }
    return nullptr;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Domain parsing
// ---------------------------------------------------------------------------

inline std::shared_ptr<Domain> parse_domain(const std::string &text) {
    SexprReader reader(text);
    Sexpr top = reader.read();
    if (top.head() != "define" || top.size() < 2 || top[1].head() != "domain")
        throw parse_error("expected (define (domain ...) ...)", top.line, top.col);
    auto d = std::make_shared<Domain>();
    d->name = top[1].size() > 1 ? top[1][1].atom : "";

    // predicates first so actions/streams can reference them
    for (size_t i = 2; i < top.size(); ++i) {
        const Sexpr &sec = top[i];
        if (sec.head() != ":predicates") continue;
        for (size_t j = 1; j < sec.size(); ++j) {
            const Sexpr &group = sec[j];
            PredKind kind;
            if (group.head() == ":fluent") kind = PredKind::Fluent;
            else if (group.head() == ":static") kind = PredKind::Static;
            else if (group.head() == ":certified") kind = PredKind::Certified;
            else throw parse_error("expected :fluent/:static/:certified group", group.line, group.col);
            for (size_t k = 1; k < group.size(); ++k) {
                const Sexpr &p = group[k];
                PredicateSchema ps;
                ps.name = p.items.at(0).atom;
                ps.kind = kind;
                for (size_t a = 1; a < p.size(); ++a) ps.sig.push_back(parse_sort(p[a].atom, p[a]));
                if (ps.arity() > kMaxArity)
                    throw parse_error("predicate arity exceeds " + std::to_string(kMaxArity),
                                      p.line, p.col);
                if (d->pred_by_name.count(ps.name))
                    throw parse_error("duplicate predicate '" + ps.name + "'", p.line, p.col);
                d->pred_by_name[ps.name] = static_cast<int>(d->predicates.size());
                d->predicates.push_back(std::move(ps));
            }
        }
    }
    if (static_cast<int>(d->predicates.size()) > kMaxPredicates)
        throw parse_error("too many predicates", top.line, top.col);

    for (size_t i = 2; i < top.size(); ++i) {
        const Sexpr &sec = top[i];
        if (sec.head() == ":action") {
            ActionSchema as;
            as.name = sec.items.at(1).atom;
            detail::VarScope scope;
            if (const Sexpr *params = detail::find_key(sec, ":params"))
                detail::parse_var_list(*params, scope);
            as.param_names = scope.names;
            as.param_sorts = scope.sorts;
            auto parse_list = [&](const char *key, std::vector<AtomTemplate> &out) {
                if (const Sexpr *list = detail::find_key(sec, key))
                    for (const auto &e : list->items)
                        out.push_back(detail::parse_atom_template(e, *d, scope, nullptr));
            };
            parse_list(":pre", as.pre_pos);
            parse_list(":pre-neg", as.pre_neg);
            parse_list(":eff", as.eff_pos);
            parse_list(":eff-neg", as.eff_neg);
            for (const auto &tpl : as.eff_pos)
                if (d->pred(tpl.pred).kind != PredKind::Fluent)
                    throw parse_error("effects must be fluent predicates", sec.line, sec.col);
            for (const auto &tpl : as.eff_neg)
                if (d->pred(tpl.pred).kind != PredKind::Fluent)
                    throw parse_error("effects must be fluent predicates", sec.line, sec.col);
            if (const Sexpr *foralls = detail::find_key(sec, ":forall")) {
                for (const auto &f : foralls->items) {
                    UniversalCondition uc;
                    detail::VarScope local = scope;
                    const Sexpr *vars = detail::find_key(f, ":vars");
                    if (!vars) throw parse_error("forall needs :vars", f.line, f.col);
                    detail::parse_var_list(*vars, local);
                    uc.var_names.assign(local.names.begin() + static_cast<long>(scope.names.size()),
                                        local.names.end());
                    uc.var_sorts.assign(local.sorts.begin() + static_cast<long>(scope.sorts.size()),
                                        local.sorts.end());
                    if (const Sexpr *when = detail::find_key(f, ":when"))
                        for (const auto &g : when->items)
                            uc.guard.push_back(detail::parse_atom_template(g, *d, local, nullptr));
                    const Sexpr *must = detail::find_key(f, ":must");
                    if (!must) throw parse_error("forall needs :must", f.line, f.col);
                    const Sexpr *body = must;
                    if (must->head() == "not") {
                        uc.body_negated = true;
                        body = &must->items.at(1);
                    }
                    uc.body = detail::parse_atom_template(*body, *d, local, nullptr);
                    // With a guard, every quantified variable must be bound by it.
                    if (!uc.guard.empty()) {
                        for (size_t v = scope.names.size(); v < local.names.size(); ++v) {
                            bool covered = false;
                            for (const auto &g : uc.guard)
                                for (Term t : g.args)
                                    if (term_is_var(t) && t == static_cast<int>(v)) covered = true;
                            if (!covered)
                                throw parse_error("forall variable '" + local.names[v] +
                                                      "' not covered by :when guard",
                                                  f.line, f.col);
                        }
                    }
                    as.universals.push_back(std::move(uc));
                }
            }
            d->action_by_name[as.name] = static_cast<int>(d->actions.size());
            d->actions.push_back(std::move(as));
        } else if (sec.head() == ":stream") {
            StreamSchema ss;
            ss.name = sec.items.at(1).atom;
            detail::VarScope scope;
            if (const Sexpr *in = detail::find_key(sec, ":inputs")) detail::parse_var_list(*in, scope);
            ss.input_names = scope.names;
            ss.input_sorts = scope.sorts;
            if (const Sexpr *outs = detail::find_key(sec, ":outputs")) {
                for (const auto &o : outs->items) {
                    ss.output_names.push_back(o.atom);
                    scope.add(o.atom, ArgSort::Pose);
                }
            }
            if (const Sexpr *dom = detail::find_key(sec, ":domain"))
                for (const auto &e : dom->items) {
                    AtomTemplate tpl = detail::parse_atom_template(e, *d, scope, nullptr);
                    if (d->pred(tpl.pred).kind == PredKind::Fluent)
                        throw parse_error("stream :domain must use static predicates", e.line, e.col);
                    ss.domain_pre.push_back(std::move(tpl));
                }
            if (const Sexpr *cert = detail::find_key(sec, ":certified"))
                for (const auto &e : cert->items)
                    ss.certified.push_back(detail::parse_atom_template(e, *d, scope, nullptr));
            if (const Sexpr *proc = detail::find_key(sec, ":proc")) {
                const std::string &p = proc->atom;
                if (p == "placement") ss.proc = StreamProc::Placement;
                else if (p == "collision") ss.proc = StreamProc::Collision;
                else if (p == "traj") ss.proc = StreamProc::Traj;
                else throw parse_error("unknown stream :proc '" + p + "'", proc->line, proc->col);
            }
            if (ss.is_generator() == (ss.proc != StreamProc::Placement))
                throw parse_error("generator streams must be placement-backed and vice versa",
                                  sec.line, sec.col);
            d->streams.push_back(std::move(ss));
        }
    }
    return d;
}

// ---------------------------------------------------------------------------
// Domain serialization
// ---------------------------------------------------------------------------

namespace detail {

inline Sexpr template_to_sexpr(const Domain &d, const AtomTemplate &tpl,
                               const VarScope &scope, const StaticContext *ctx) {
    Sexpr e = Sexpr::make_list();
    e.items.push_back(Sexpr::make_atom(d.pred(tpl.pred).name));
    for (Term t : tpl.args) {
        if (term_is_var(t))
            e.items.push_back(Sexpr::make_atom(scope.names[static_cast<size_t>(t)]));
        else
            e.items.push_back(
                Sexpr::make_atom(ctx->entities[static_cast<size_t>(term_entity(t))].name));
    }
    return e;
}

inline Sexpr var_list_to_sexpr(const std::vector<std::string> &names,
                               const std::vector<ArgSort> &sorts) {
    Sexpr e = Sexpr::make_list();
    for (size_t i = 0; i < names.size(); ++i) {
        e.items.push_back(Sexpr::make_atom(names[i]));
        e.items.push_back(Sexpr::make_atom(sort_name(sorts[i])));
    }
    return e;
}

}  // namespace detail

inline std::string serialize_domain(const Domain &d) {
    Sexpr top = Sexpr::make_list();
    top.items.push_back(Sexpr::make_atom("define"));
    top.items.push_back(Sexpr::make_list({Sexpr::make_atom("domain"), Sexpr::make_atom(d.name)}));

    Sexpr preds = Sexpr::make_list({Sexpr::make_atom(":predicates")});
    const char *group_names[3] = {":fluent", ":static", ":certified"};
    PredKind kinds[3] = {PredKind::Fluent, PredKind::Static, PredKind::Certified};
    for (int g = 0; g < 3; ++g) {
        Sexpr group = Sexpr::make_list({Sexpr::make_atom(group_names[g])});
        for (const auto &p : d.predicates) {
            if (p.kind != kinds[g]) continue;
            Sexpr pe = Sexpr::make_list({Sexpr::make_atom(p.name)});
            for (ArgSort s : p.sig) pe.items.push_back(Sexpr::make_atom(sort_name(s)));
            group.items.push_back(std::move(pe));
        }
        preds.items.push_back(std::move(group));
    }
    top.items.push_back(std::move(preds));

    for (const auto &as : d.actions) {
        detail::VarScope scope;
        scope.names = as.param_names;
        scope.sorts = as.param_sorts;
        Sexpr a = Sexpr::make_list({Sexpr::make_atom(":action"), Sexpr::make_atom(as.name)});
        a.items.push_back(Sexpr::make_atom(":params"));
        a.items.push_back(detail::var_list_to_sexpr(as.param_names, as.param_sorts));
        auto emit_list = [&](const char *key, const std::vector<AtomTemplate> &tpls,
                             const detail::VarScope &sc) {
            a.items.push_back(Sexpr::make_atom(key));
            Sexpr list = Sexpr::make_list();
            for (const auto &tpl : tpls)
                list.items.push_back(detail::template_to_sexpr(d, tpl, sc, nullptr));
            a.items.push_back(std::move(list));
        };
        emit_list(":pre", as.pre_pos, scope);
        emit_list(":pre-neg", as.pre_neg, scope);
        a.items.push_back(Sexpr::make_atom(":forall"));
        Sexpr foralls = Sexpr::make_list();
        for (const auto &uc : as.universals) {
            detail::VarScope local = scope;
            for (size_t i = 0; i < uc.var_names.size(); ++i)
                local.add(uc.var_names[i], uc.var_sorts[i]);
            Sexpr f = Sexpr::make_list();
            f.items.push_back(Sexpr::make_atom(":vars"));
            f.items.push_back(detail::var_list_to_sexpr(uc.var_names, uc.var_sorts));
            f.items.push_back(Sexpr::make_atom(":when"));
            Sexpr guard = Sexpr::make_list();
            for (const auto &g : uc.guard)
                guard.items.push_back(detail::template_to_sexpr(d, g, local, nullptr));
            f.items.push_back(std::move(guard));
            f.items.push_back(Sexpr::make_atom(":must"));
            Sexpr body = detail::template_to_sexpr(d, uc.body, local, nullptr);
            if (uc.body_negated)
                body = Sexpr::make_list({Sexpr::make_atom("not"), std::move(body)});
            f.items.push_back(std::move(body));
            foralls.items.push_back(std::move(f));
        }
        a.items.push_back(std::move(foralls));
        emit_list(":eff", as.eff_pos, scope);
        emit_list(":eff-neg", as.eff_neg, scope);
        top.items.push_back(std::move(a));
    }

    for (const auto &ss : d.streams) {
        detail::VarScope scope;
        scope.names = ss.input_names;
        scope.sorts = ss.input_sorts;
        for (const auto &o : ss.output_names) scope.add(o, ArgSort::Pose);
        Sexpr s = Sexpr::make_list({Sexpr::make_atom(":stream"), Sexpr::make_atom(ss.name)});
        s.items.push_back(Sexpr::make_atom(":inputs"));
        s.items.push_back(detail::var_list_to_sexpr(ss.input_names, ss.input_sorts));
        s.items.push_back(Sexpr::make_atom(":outputs"));
        Sexpr outs = Sexpr::make_list();
        for (const auto &o : ss.output_names) outs.items.push_back(Sexpr::make_atom(o));
        s.items.push_back(std::move(outs));
        s.items.push_back(Sexpr::make_atom(":domain"));
        Sexpr dom = Sexpr::make_list();
        for (const auto &tpl : ss.domain_pre)
            dom.items.push_back(detail::template_to_sexpr(d, tpl, scope, nullptr));
        s.items.push_back(std::move(dom));
        s.items.push_back(Sexpr::make_atom(":certified"));
        Sexpr cert = Sexpr::make_list();
        for (const auto &tpl : ss.certified)
            cert.items.push_back(detail::template_to_sexpr(d, tpl, scope, nullptr));
        s.items.push_back(std::move(cert));
        s.items.push_back(Sexpr::make_atom(":proc"));
        s.items.push_back(Sexpr::make_atom(ss.proc == StreamProc::Placement ? "placement"
                                           : ss.proc == StreamProc::Collision ? "collision"
                                                                              : "traj"));
        top.items.push_back(std::move(s));
    }

    std::ostringstream os;
    write_sexpr(os, top, 0);
    os << "\n";
    return os.str();
}

}  // namespace genplan2d

#endif
