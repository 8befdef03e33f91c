#ifndef GENPLAN2D_PROBLEM_IO_HPP
#define GENPLAN2D_PROBLEM_IO_HPP

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "genplan2d/domain_io.hpp"
#include "genplan2d/ground.hpp"

namespace genplan2d {

namespace detail {

inline double parse_number(const Sexpr &e) {
    try {
        size_t used = 0;
        double v = std::stod(e.atom, &used);
        if (used != e.atom.size()) throw std::invalid_argument("");
        return v;
    } catch (...) {
        throw parse_error("expected a number, got '" + e.atom + "'", e.line, e.col);
    }
}

inline Literal parse_goal_literal(const Sexpr &e, const Domain &d, const VarScope &scope,
                                  const std::map<std::string, int> &ids) {
    Literal lit;
    if (e.head() == "not") {
        lit.negated = true;
        lit.atom = parse_atom_template(e.items.at(1), d, scope, &ids);
    } else {
        lit.atom = parse_atom_template(e, d, scope, &ids);
    }
    return lit;
}

inline void parse_goal_inner(const Sexpr &e, const Domain &d, VarScope forall_scope,
                             GoalConjunct &gc, const std::map<std::string, int> &ids) {
    if (e.head() == "exists") {
        VarScope scope = forall_scope;
        parse_var_list(e.items.at(1), scope);
        gc.exists_names.assign(scope.names.begin() + static_cast<long>(forall_scope.names.size()),
                               scope.names.end());
        gc.exists_sorts.assign(scope.sorts.begin() + static_cast<long>(forall_scope.sorts.size()),
                               scope.sorts.end());
        const Sexpr &body = e.items.at(2);
        if (body.head() == "and") {
            for (size_t i = 1; i < body.size(); ++i)
                gc.body.push_back(parse_goal_literal(body[i], d, scope, ids));
        } else {
            gc.body.push_back(parse_goal_literal(body, d, scope, ids));
        }
    } else if (e.head() == "and") {
        for (size_t i = 1; i < e.size(); ++i)
            gc.body.push_back(parse_goal_literal(e[i], d, forall_scope, ids));
    } else {
        gc.body.push_back(parse_goal_literal(e, d, forall_scope, ids));
    }
}

inline GoalConjunct parse_goal_conjunct(const Sexpr &e, const Domain &d,
                                        const std::map<std::string, int> &ids) {
    GoalConjunct gc;
    if (e.head() == "forall") {
        VarScope scope;
        parse_var_list(e.items.at(1), scope);
        gc.forall_names = scope.names;
        gc.forall_sorts = scope.sorts;
        const Sexpr *inner = &e.items.at(2);
        if (inner->head() == "when") {
            const Sexpr &guard = inner->items.at(1);
            if (guard.head() == "and") {
                for (size_t i = 1; i < guard.size(); ++i)
                    gc.guard.push_back(parse_atom_template(guard[i], d, scope, &ids));
            } else {
                gc.guard.push_back(parse_atom_template(guard, d, scope, &ids));
            }
            inner = &inner->items.at(2);
        }
        parse_goal_inner(*inner, d, scope, gc, ids);
    } else {
        parse_goal_inner(e, d, VarScope{}, gc, ids);
    }
    return gc;
}

}  // namespace detail

inline ProblemInstance parse_problem(const std::string &text, std::shared_ptr<const Domain> domain) {
    SexprReader reader(text);
    Sexpr top = reader.read();
    if (top.head() != "define" || top.size() < 2 || top[1].head() != "problem")
        throw parse_error("expected (define (problem ...) ...)", top.line, top.col);

    ProblemInstance pi;
    pi.name = top[1].size() > 1 ? top[1][1].atom : "";
    pi.domain = domain;
    auto ctx = std::make_shared<StaticContext>();
    ctx->domain = domain;
    std::map<std::string, int> ids;

    auto add_entity = [&](const std::string &name, EntityKind kind,
                          std::optional<PoseVal> payload, const Sexpr &at) {
        if (ids.count(name)) throw parse_error("duplicate entity '" + name + "'", at.line, at.col);
        if (static_cast<int>(ctx->entities.size()) >= kMaxEntities)
            throw parse_error("too many entities", at.line, at.col);
        Entity e;
        e.id = static_cast<int>(ctx->entities.size());
        e.name = name;
        e.kind = kind;
        e.payload = payload;
        ids[name] = e.id;
        ctx->entities.push_back(std::move(e));
    };

    for (size_t i = 2; i < top.size(); ++i) {
        const Sexpr &sec = top[i];
        if (sec.head() == ":domain") {
            if (sec.size() > 1 && sec[1].atom != domain->name)
                throw parse_error("problem requires domain '" + sec[1].atom + "'", sec.line,
                                  sec.col);
        } else if (sec.head() == ":objects") {
            for (size_t j = 1; j < sec.size(); ++j)
                add_entity(sec[j].atom, EntityKind::Symbolic, std::nullopt, sec[j]);
        }
    }
    // Sampled entities may reference object frames, so parse them second.
    for (size_t i = 2; i < top.size(); ++i) {
        const Sexpr &sec = top[i];
        if (sec.head() != ":sampled") continue;
        for (size_t j = 1; j < sec.size(); ++j) {
            const Sexpr &s = sec[j];
            PoseVal p;
            p.x = detail::parse_number(s.items.at(1));
            p.y = detail::parse_number(s.items.at(2));
            auto it = ids.find(s.items.at(3).atom);
            if (it == ids.end())
                throw parse_error("unknown frame '" + s.items.at(3).atom + "'", s.line, s.col);
            p.frame = it->second;
            add_entity(s.items.at(0).atom, EntityKind::Sampled, p, s);
        }
    }
    for (size_t i = 2; i < top.size(); ++i) {
        const Sexpr &sec = top[i];
        if (sec.head() != ":geom") continue;
        for (size_t j = 1; j < sec.size(); ++j) {
            const Sexpr &g = sec[j];
            const std::string &kind = g.head();
            auto entity_of = [&](const Sexpr &a) {
                auto it = ids.find(a.atom);
                if (it == ids.end())
                    throw parse_error("unknown entity '" + a.atom + "'", a.line, a.col);
                return it->second;
            };
            if (kind == "extent") {
                Extent e;
                e.hw = detail::parse_number(g.items.at(2));
                e.hh = detail::parse_number(g.items.at(3));
                if (e.hw <= 0 || e.hh <= 0)
                    throw parse_error("extent must be strictly positive", g.line, g.col);
                ctx->geom.extents[entity_of(g.items.at(1))] = e;
            } else if (kind == "surface") {
                SurfaceInfo si;
                si.entity = entity_of(g.items.at(1));
                const std::string &k = g.items.at(2).atom;
                if (k == "table") si.kind = SurfaceKind::Table;
                else if (k == "tray") si.kind = SurfaceKind::Tray;
                else if (k == "region") si.kind = SurfaceKind::Region;
                else if (k == "source") si.kind = SurfaceKind::Source;
                else if (k == "destination") si.kind = SurfaceKind::Destination;
                else throw parse_error("unknown surface kind '" + k + "'", g.line, g.col);
                si.frame = entity_of(g.items.at(3));
                si.cx = detail::parse_number(g.items.at(4));
                si.cy = detail::parse_number(g.items.at(5));
                si.hw = detail::parse_number(g.items.at(6));
                si.hh = detail::parse_number(g.items.at(7));
                if (si.hw <= 0 || si.hh <= 0)
                    throw parse_error("surface must have positive area", g.line, g.col);
                ctx->geom.surfaces[si.entity] = si;
            } else if (kind == "robot") {
                ctx->geom.robot_x = detail::parse_number(g.items.at(1));
                ctx->geom.robot_y = detail::parse_number(g.items.at(2));
            } else if (kind == "table-frame") {
                ctx->geom.table_frame = entity_of(g.items.at(1));
            } else {
                throw parse_error("unknown :geom entry '" + kind + "'", g.line, g.col);
            }
        }
    }
    ctx->rebuild_sort_lists();

    for (size_t i = 2; i < top.size(); ++i) {
        const Sexpr &sec = top[i];
        if (sec.head() != ":init") continue;
        detail::VarScope empty;
        for (size_t j = 1; j < sec.size(); ++j) {
            AtomTemplate tpl = detail::parse_atom_template(sec[j], *domain, empty, &ids);
            std::vector<int> none;
            AtomCode c = instantiate(tpl, none);
            switch (domain->pred(tpl.pred).kind) {
                case PredKind::Fluent: pi.initial_fluents.push_back(c); break;
                case PredKind::Static: ctx->static_atoms.push_back(c); break;
                case PredKind::Certified: ctx->certified_atoms.push_back(c); break;
            }
        }
    }
    sort_unique(pi.initial_fluents);
    sort_unique(ctx->static_atoms);
    sort_unique(ctx->certified_atoms);

    for (size_t i = 2; i < top.size(); ++i) {
        const Sexpr &sec = top[i];
        if (sec.head() != ":goal") continue;
        const Sexpr &g = sec.items.at(1);
        if (g.head() == "and") {
            for (size_t j = 1; j < g.size(); ++j)
                pi.goal.conjuncts.push_back(detail::parse_goal_conjunct(g[j], *domain, ids));
        } else {
            pi.goal.conjuncts.push_back(detail::parse_goal_conjunct(g, *domain, ids));
        }
    }

    finalize_context(*ctx);
    pi.ctx = ctx;
    return pi;
}

// ---------------------------------------------------------------------------
// Problem serialization
// ---------------------------------------------------------------------------

inline Sexpr ground_atom_to_sexpr(const Domain &d, const StaticContext &ctx, AtomCode c) {
    int pred = atom_pred(c);
    int args[kMaxArity];
    atom_args(c, d.pred(pred).arity(), args);
    Sexpr e = Sexpr::make_list({Sexpr::make_atom(d.pred(pred).name)});
    for (int i = 0; i < d.pred(pred).arity(); ++i)
        e.items.push_back(Sexpr::make_atom(ctx.entities[static_cast<size_t>(args[i])].name));
    return e;
}

inline std::string serialize_problem(const ProblemInstance &pi) {
    const Domain &d = *pi.domain;
    const StaticContext &ctx = *pi.ctx;
    Sexpr top = Sexpr::make_list();
    top.items.push_back(Sexpr::make_atom("define"));
    top.items.push_back(
        Sexpr::make_list({Sexpr::make_atom("problem"), Sexpr::make_atom(pi.name)}));
    top.items.push_back(
        Sexpr::make_list({Sexpr::make_atom(":domain"), Sexpr::make_atom(d.name)}));

    Sexpr objs = Sexpr::make_list({Sexpr::make_atom(":objects")});
    Sexpr sampled = Sexpr::make_list({Sexpr::make_atom(":sampled")});
    for (const auto &e : ctx.entities) {
        if (e.kind == EntityKind::Symbolic) {
            objs.items.push_back(Sexpr::make_atom(e.name));
        } else {
            Sexpr s = Sexpr::make_list({Sexpr::make_atom(e.name),
                                        Sexpr::make_atom(format_double(e.payload->x)),
                                        Sexpr::make_atom(format_double(e.payload->y)),
                                        Sexpr::make_atom(ctx.entities[static_cast<size_t>(
                                                                          e.payload->frame)]
                                                             .name)});
            sampled.items.push_back(std::move(s));
        }
    }
    top.items.push_back(std::move(objs));
    top.items.push_back(std::move(sampled));

    Sexpr geom = Sexpr::make_list({Sexpr::make_atom(":geom")});
    for (const auto &[id, e] : ctx.geom.extents) {
        geom.items.push_back(Sexpr::make_list(
            {Sexpr::make_atom("extent"), Sexpr::make_atom(ctx.entities[static_cast<size_t>(id)].name),
             Sexpr::make_atom(format_double(e.hw)), Sexpr::make_atom(format_double(e.hh))}));
    }
    for (const auto &[id, s] : ctx.geom.surfaces) {
        const char *k = s.kind == SurfaceKind::Table        ? "table"
                        : s.kind == SurfaceKind::Tray       ? "tray"
                        : s.kind == SurfaceKind::Region     ? "region"
                        : s.kind == SurfaceKind::Source     ? "source"
                                                            : "destination";
        geom.items.push_back(Sexpr::make_list(
            {Sexpr::make_atom("surface"), Sexpr::make_atom(ctx.entities[static_cast<size_t>(id)].name),
             Sexpr::make_atom(k), Sexpr::make_atom(ctx.entities[static_cast<size_t>(s.frame)].name),
             Sexpr::make_atom(format_double(s.cx)), Sexpr::make_atom(format_double(s.cy)),
             Sexpr::make_atom(format_double(s.hw)), Sexpr::make_atom(format_double(s.hh))}));
    }
    geom.items.push_back(Sexpr::make_list({Sexpr::make_atom("robot"),
                                           Sexpr::make_atom(format_double(ctx.geom.robot_x)),
                                           Sexpr::make_atom(format_double(ctx.geom.robot_y))}));
    if (ctx.geom.table_frame >= 0)
        geom.items.push_back(Sexpr::make_list(
            {Sexpr::make_atom("table-frame"),
             Sexpr::make_atom(ctx.entities[static_cast<size_t>(ctx.geom.table_frame)].name)}));
    top.items.push_back(std::move(geom));

    Sexpr init = Sexpr::make_list({Sexpr::make_atom(":init")});
    for (AtomCode c : ctx.static_atoms) init.items.push_back(ground_atom_to_sexpr(d, ctx, c));
    for (AtomCode c : ctx.certified_atoms) init.items.push_back(ground_atom_to_sexpr(d, ctx, c));
    for (AtomCode c : pi.initial_fluents) init.items.push_back(ground_atom_to_sexpr(d, ctx, c));
    top.items.push_back(std::move(init));

    Sexpr goal = Sexpr::make_list({Sexpr::make_atom("and")});
    for (const auto &gc : pi.goal.conjuncts) {
        detail::VarScope scope;
        for (size_t i = 0; i < gc.forall_names.size(); ++i)
            scope.add(gc.forall_names[i], gc.forall_sorts[i]);
        detail::VarScope full = scope;
        for (size_t i = 0; i < gc.exists_names.size(); ++i)
            full.add(gc.exists_names[i], gc.exists_sorts[i]);
        Sexpr body;
        if (gc.body.size() == 1 && gc.exists_names.empty()) {
            const Literal &lit = gc.body[0];
            body = detail::template_to_sexpr(d, lit.atom, full, &ctx);
            if (lit.negated) body = Sexpr::make_list({Sexpr::make_atom("not"), std::move(body)});
        } else {
            Sexpr conj = Sexpr::make_list({Sexpr::make_atom("and")});
            for (const Literal &lit : gc.body) {
                Sexpr a = detail::template_to_sexpr(d, lit.atom, full, &ctx);
                if (lit.negated) a = Sexpr::make_list({Sexpr::make_atom("not"), std::move(a)});
                conj.items.push_back(std::move(a));
            }
            body = std::move(conj);
            if (!gc.exists_names.empty()) {
                body = Sexpr::make_list(
                    {Sexpr::make_atom("exists"),
                     detail::var_list_to_sexpr(gc.exists_names, gc.exists_sorts), std::move(body)});
            }
        }
        if (!gc.forall_names.empty()) {
            if (!gc.guard.empty()) {
                Sexpr guard = Sexpr::make_list({Sexpr::make_atom("and")});
                for (const auto &g : gc.guard)
                    guard.items.push_back(detail::template_to_sexpr(d, g, scope, &ctx));
                body = Sexpr::make_list(
                    {Sexpr::make_atom("when"), std::move(guard), std::move(body)});
            }
            body = Sexpr::make_list({Sexpr::make_atom("forall"),
                                     detail::var_list_to_sexpr(gc.forall_names, gc.forall_sorts),
                                     std::move(body)});
        }
        goal.items.push_back(std::move(body));
    }
    Sexpr goalsec = Sexpr::make_list({Sexpr::make_atom(":goal"), std::move(goal)});
    top.items.push_back(std::move(goalsec));

    std::ostringstream os;
    write_sexpr(os, top, 0);
    os << "\n";
    return os.str();
}

}  // namespace genplan2d

#endif
