#include "esbilr/compact.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace esbilr {

std::string row_family_name(RowFamily f) {
    switch (f) {
        case RowFamily::Load: return "load";
        case RowFamily::DepartOnce: return "depart_once";
        case RowFamily::OneState: return "one_state";
        case RowFamily::FollowU: return "follow_u";
        case RowFamily::FollowXCs: return "follow_x_cs";
        case RowFamily::FollowXSh: return "follow_x_sh";
        case RowFamily::XWindow: return "x_window";
        case RowFamily::ZPred: return "z_pred";
        case RowFamily::FollowZ: return "follow_z";
        case RowFamily::ZWindow: return "z_window";
        case RowFamily::WBeforeX: return "w_before_x";
        case RowFamily::WNotAfterX: return "w_not_after_x";
        case RowFamily::WTravelZ: return "w_travel_z";
        case RowFamily::WServeZ: return "w_serve_z";
        case RowFamily::WBeforeU: return "w_before_u";
        case RowFamily::WServeU: return "w_serve_u";
        case RowFamily::OneShelter: return "one_shelter";
        case RowFamily::DepartAfterServe: return "depart_after_serve";
        case RowFamily::ArriveBeforeServe: return "arrive_before_serve";
        case RowFamily::ReturnLeDepart: return "return_le_depart";
        case RowFamily::ReturnAfterDepart: return "return_after_depart";
        case RowFamily::EndAfterReturn: return "end_after_return";
        case RowFamily::ServeBeforeReturn: return "serve_before_return";
        case RowFamily::SocU: return "soc_u";
        case RowFamily::SocX: return "soc_x";
        case RowFamily::SocZ: return "soc_z";
        case RowFamily::SocDepartX: return "soc_depart_x";
        case RowFamily::SocDepartR: return "soc_depart_r";
        case RowFamily::SocReturn: return "soc_return";
        case RowFamily::GLink: return "g_link";
        case RowFamily::Symmetry: return "symmetry";
        case RowFamily::Shift: return "shift";
        case RowFamily::ForceRoute: return "force_route";
    }
    return "unknown";
}

int CompactModel::rows_in_family(RowFamily f) const {
    int n = 0;
    for (const auto& t : tags) n += t.fam == f;
    return n;
}

namespace {

struct Builder {
    const Instance& inst;
    const CompactOptions& opt;
    const DualPrices* duals = nullptr; // pricing objective when set
    int pricing_type = -1;
    bool shift;

    CompactModel m;
    int n, last; // slot count, last slot index (relative)

    Builder(const Instance& inst_, const CompactOptions& opt_)
        : inst(inst_), opt(opt_), shift(opt_.with_shift), n(inst_.horizon.slot_count()),
          last(inst_.horizon.slot_count() - 1) {}

    int T(int k, int a, int b) const { return inst.travel(k, a, b); }
    double R(int k, int a, int b) const { return inst.travel_kwh(k, a, b); }
    int snode(int i) const { return inst.network.shelter_node(i); }
    int cnode(int j) const { return inst.network.station_node(j); }
    int Si(int i) const { return inst.network.service_shelter[i]; }
    int Sj(int j) const { return inst.network.service_station[j]; }
    int service_of_node(int q) const {
        return inst.network.is_shelter(q) ? Si(inst.network.shelter_of(q))
                                          : Sj(inst.network.station_of(q));
    }

    bool pricing() const { return pricing_type >= 0; }

    void add_row(RowFamily fam, Sense s, double rhs, std::vector<std::pair<int, double>> coefs,
                 std::array<int, 4> idx) {
        // drop unmaterialized variables (fixed to zero) and empty rows
        std::vector<std::pair<int, double>> kept;
        kept.reserve(coefs.size());
        for (auto [v, c] : coefs)
            if (v >= 0 && c != 0.0) kept.push_back({v, c});
        if (kept.empty()) return;
        m.lp.add_row(s, rhs, std::move(kept));
        m.tags.push_back({fam, idx});
    }

    void build() {
        const int I = inst.n_shelters(), J = inst.n_stations(), K = inst.n_types();
        auto& cat = m.cat;
        cat.n_shelters = I;
        cat.n_stations = J;
        cat.n_nodes = inst.network.n_nodes();
        cat.n_slots = n;

        if (pricing()) {
            cat.bus_type = {pricing_type};
        } else {
            for (int k = 0; k < K; ++k)
                for (int c = 0; c < inst.types[k].available_count; ++c) cat.bus_type.push_back(k);
        }
        cat.n_buses = static_cast<int>(cat.bus_type.size());
        const int H = cat.n_buses;

        cat.u.assign(H * I * n, -1);
        cat.w.assign(H * I * n, -1);
        cat.r.assign(H * I * n, -1);
        cat.g.assign(H * I * n, -1);
        cat.x.assign(H * I * cat.n_nodes * n, -1);
        cat.z.assign(H * J * I * n, -1);
        cat.soc.assign(H * n, -1);
        cat.l.assign(I, -1);
        if (shift) cat.l_shift.assign(I * n, -1);

        // --- variables -------------------------------------------------------
        for (int h = 0; h < H; ++h) {
            int k = cat.bus_type[h];
            const auto& tp = inst.types[k];
            for (int i = 0; i < I; ++i) {
                if (!inst.compatible(k, i)) continue;
                for (int t = 0; t < n; ++t) {
                    if (t + T(k, 0, snode(i)) + Si(i) < last)
                        cat.u[(h * I + i) * n + t] =
                            m.lp.add_var(0, 1, obj_u(k, i), {});
                    if (t < last) {
                        cat.w[(h * I + i) * n + t] = m.lp.add_var(0, 1, obj_w(k, i, t), {});
                        cat.g[(h * I + i) * n + t] =
                            m.lp.add_var(0, tp.usable(), obj_g(i, t), {});
                    }
                    cat.r[(h * I + i) * n + t] = m.lp.add_var(0, 1, obj_r(k, i), {});
                    for (int q = 1; q < cat.n_nodes; ++q) {
                        if (q == snode(i)) continue;
                        if (inst.network.is_shelter(q) &&
                            !inst.compatible(k, inst.network.shelter_of(q)))
                            continue;
                        if (t + T(k, snode(i), q) + service_of_node(q) < last)
                            cat.x[((h * I + i) * cat.n_nodes + q) * n + t] =
                                m.lp.add_var(0, 1, obj_x(k, i, q), {});
                    }
                }
                for (int j = 0; j < J; ++j) {
                    for (int t = 0; t < n; ++t) {
                        if (t + T(k, cnode(j), snode(i)) + Si(i) >= last) continue;
                        bool reachable = false;
                        for (int i2 = 0; i2 < I && !reachable; ++i2)
                            if (inst.compatible(k, i2) &&
                                t - Sj(j) - T(k, snode(i2), cnode(j)) >= 0)
                                reachable = true;
                        if (!reachable) continue; // no in-horizon arrival can precede it
                        cat.z[((h * J + j) * I + i) * n + t] =
                            m.lp.add_var(0, 1, obj_z(k, j, i), {});
                    }
                }
            }
            for (int t = 0; t < n; ++t)
                cat.soc[h * n + t] = m.lp.add_var(tp.cap_min, tp.cap_max, 0.0, {});
        }
        if (!pricing()) {
            for (int i = 0; i < I; ++i)
                cat.l[i] = m.lp.add_var(0, kInf, inst.demands.penalty[i], {});
            if (shift) {
                for (int i = 0; i < I; ++i)
                    for (int t = 0; t < n; ++t) {
                        double fee = inst.demands.has_shift_fee() ? inst.demands.shift_fee[i][t] : 0.0;
                        cat.l_shift[i * n + t] = m.lp.add_var(0, kInf, fee, {});
                    }
            }
        }
        if (m.lp.n_vars() > opt.var_cap)
            throw std::runtime_error("build_compact: instance too large for explicit enumeration (" +
                                     std::to_string(m.lp.n_vars()) + " variables)");

        m.is_int.assign(m.lp.n_vars(), 0);
        for (int h = 0; h < H; ++h)
            for (int i = 0; i < I; ++i)
                for (int t = 0; t < n; ++t) {
                    for (int id : {cat.iu(h, i, t), cat.iw(h, i, t), cat.ir(h, i, t)})
                        if (id >= 0) m.is_int[id] = 1;
                    for (int q = 0; q < cat.n_nodes; ++q)
                        if (int id = cat.ix(h, i, q, t); id >= 0) m.is_int[id] = 1;
                }
        for (int h = 0; h < H; ++h)
            for (int j = 0; j < J; ++j)
                for (int i = 0; i < I; ++i)
                    for (int t = 0; t < n; ++t)
                        if (int id = cat.iz(h, j, i, t); id >= 0) m.is_int[id] = 1;

        // --- rows ------------------------------------------------------------
        // The instance's big-Ms are validated against the paper's lower bounds, but
        // those can be loose on degenerate data (e.g. zero demand makes 2*sum(P)
        // tiny). Floor them at values that provably deactivate every row.
        double max_cap = 0.0, max_leg = 0.0;
        int max_service = 1;
        for (const auto& t : inst.types) max_cap = std::max(max_cap, t.cap_max);
        for (int k = 0; k < K; ++k)
            for (int a = 0; a < cat.n_nodes; ++a)
                for (int b = 0; b < cat.n_nodes; ++b)
                    max_leg = std::max(max_leg, inst.travel_kwh(k, a, b));
        for (int v : inst.network.service_shelter) max_service = std::max(max_service, v);
        const double M1 = std::max(inst.big_m1, max_cap + max_leg + 1.0);
        const double M2 =
            std::max(inst.big_m2, (1.0 + max_service) * max_cap + max_leg + 1.0);

        if (!pricing()) {
            for (int i = 0; i < I; ++i) {
                std::vector<std::pair<int, double>> c;
                for (int h = 0; h < H; ++h)
                    for (int t = 0; t < n; ++t) c.push_back({cat.ig(h, i, t), 1.0});
                c.push_back({cat.il(i), 1.0});
                add_row(RowFamily::Load, Sense::GE, inst.demands.shelter_total(i), std::move(c),
                        {i, -1, -1, -1});
            }
            if (shift) {
                for (int i = 0; i < I; ++i)
                    for (int t = 0; t < n; ++t) {
                        std::vector<std::pair<int, double>> c;
                        for (int h = 0; h < H; ++h) c.push_back({cat.ig(h, i, t), 1.0});
                        c.push_back({cat.ilshift(i, t), 1.0});
                        add_row(RowFamily::Shift, Sense::GE, inst.demands.demand[i][t],
                                std::move(c), {i, -1, -1, t});
                    }
            }
        }

        for (int h = 0; h < H; ++h) build_bus(h, M1, M2);

        if (opt.symmetry_breaking && !pricing()) {
            for (int k = 0; k < K; ++k) {
                std::vector<int> buses;
                for (int h = 0; h < H; ++h)
                    if (cat.bus_type[h] == k) buses.push_back(h);
                for (size_t p = 0; p + 1 < buses.size(); ++p)
                    for (int t = 0; t < n; ++t) {
                        std::vector<std::pair<int, double>> c;
                        for (size_t p2 = p + 1; p2 < buses.size(); ++p2)
                            for (int i = 0; i < I; ++i)
                                for (int tau = 0; tau <= t; ++tau)
                                    c.push_back({cat.iu(buses[p2], i, tau), 1.0});
                        for (int i = 0; i < I; ++i)
                            for (int tau = 0; tau <= t; ++tau)
                                c.push_back({cat.iu(buses[p], i, tau), -M1});
                        add_row(RowFamily::Symmetry, Sense::LE, 0.0, std::move(c),
                                {k, buses[p], -1, t});
                    }
            }
        }

        if (pricing()) {
            std::vector<std::pair<int, double>> c;
            for (int i = 0; i < I; ++i)
                for (int t = 0; t < n; ++t) c.push_back({cat.iu(0, i, t), 1.0});
            add_row(RowFamily::ForceRoute, Sense::EQ, 1.0, std::move(c), {pricing_type, -1, -1, -1});
        }
    }

    void build_bus(int h, double M1, double M2) {
        const auto& cat = m.cat;
        const int I = inst.n_shelters(), J = inst.n_stations();
        const int k = cat.bus_type[h];
        const auto& tp = inst.types[k];

        { // each bus departs the depot at most once
            std::vector<std::pair<int, double>> c;
            for (int i = 0; i < I; ++i)
                for (int t = 0; t < n; ++t) c.push_back({cat.iu(h, i, t), 1.0});
            add_row(RowFamily::DepartOnce, Sense::LE, 1.0, std::move(c), {h, -1, -1, -1});
        }

        for (int t = 0; t < n; ++t) { // one active state per slot
            std::vector<std::pair<int, double>> c;
            for (int i = 0; i < I; ++i) {
                for (int q = 0; q < cat.n_nodes; ++q) c.push_back({cat.ix(h, i, q, t), 1.0});
                c.push_back({cat.iw(h, i, t), 1.0});
                c.push_back({cat.ir(h, i, t), 1.0});
                for (int j = 0; j < J; ++j) c.push_back({cat.iz(h, j, i, t), 1.0});
                for (int tau = 0; tau < t; ++tau) c.push_back({cat.iu(h, i, tau), -1.0});
            }
            add_row(RowFamily::OneState, Sense::LE, 0.0, std::move(c), {h, -1, -1, t});
        }

        for (int i = 0; i < I; ++i) {
            if (!inst.compatible(k, i)) continue;
            const int si = Si(i);
            for (int t = 0; t < n; ++t) {
                // --- depot departures ---
                if (int vu = cat.iu(h, i, t); vu >= 0) {
                    int d = t + T(k, 0, snode(i)) + si;
                    std::vector<std::pair<int, double>> c;
                    for (int q = 0; q < cat.n_nodes; ++q) c.push_back({cat.ix(h, i, q, d), 1.0});
                    c.push_back({cat.ir(h, i, d), 1.0});
                    c.push_back({vu, -1.0});
                    add_row(RowFamily::FollowU, Sense::GE, 0.0, std::move(c), {h, i, -1, t});

                    int arr = t + T(k, 0, snode(i));
                    for (int tau = 0; tau < arr && tau <= last; ++tau)
                        if (cat.iw(h, i, tau) >= 0)
                            add_row(RowFamily::WBeforeU, Sense::LE, 1.0,
                                    {{cat.iw(h, i, tau), 1.0}, {vu, 1.0}}, {h, i, tau, t});
                    for (int tau = arr; tau < arr + si; ++tau)
                        add_row(RowFamily::WServeU, Sense::GE, 0.0,
                                {{cat.iw(h, i, tau), 1.0}, {vu, -1.0}}, {h, i, tau, t});

                    add_row(RowFamily::SocU, Sense::LE, tp.cap_max - R(k, 0, snode(i)) + M1,
                            {{cat.isoc(h, arr), 1.0}, {vu, M1}}, {h, i, -1, t});
                    add_row(RowFamily::SocU, Sense::GE, tp.cap_max - R(k, 0, snode(i)) - M1,
                            {{cat.isoc(h, arr), 1.0}, {vu, -M1}}, {h, i, -1, t});
                }

                // --- shelter departures ---
                for (int q = 1; q < cat.n_nodes; ++q) {
                    int vx = cat.ix(h, i, q, t);
                    if (vx < 0) continue;
                    int tq = T(k, snode(i), q), sq = service_of_node(q);
                    if (inst.network.is_station(q)) {
                        int j = inst.network.station_of(q);
                        int d = t + tq + sq;
                        std::vector<std::pair<int, double>> c;
                        for (int i2 = 0; i2 < I; ++i2) c.push_back({cat.iz(h, j, i2, d), 1.0});
                        c.push_back({vx, -1.0});
                        add_row(RowFamily::FollowXCs, Sense::GE, 0.0, std::move(c), {h, i, j, t});
                    } else {
                        int i2 = inst.network.shelter_of(q);
                        int d = t + tq + sq;
                        std::vector<std::pair<int, double>> c;
                        for (int q2 = 0; q2 < cat.n_nodes; ++q2)
                            c.push_back({cat.ix(h, i2, q2, d), 1.0});
                        c.push_back({cat.ir(h, i2, d), 1.0});
                        c.push_back({vx, -1.0});
                        add_row(RowFamily::FollowXSh, Sense::GE, 0.0, std::move(c), {h, i, i2, t});
                    }

                    { // exclusivity window, top end exclusive so the forced follow-up survives
                        std::vector<std::pair<int, double>> c;
                        int lo = std::max(0, t - si), hi = std::min(last, t + tq + sq - 1);
                        for (int tau = lo; tau <= hi; ++tau) {
                            for (int i2 = 0; i2 < I; ++i2) {
                                if (i2 != i)
                                    for (int q2 = 0; q2 < cat.n_nodes; ++q2)
                                        c.push_back({cat.ix(h, i2, q2, tau), 1.0});
                                for (int j2 = 0; j2 < J; ++j2)
                                    c.push_back({cat.iz(h, j2, i2, tau), 1.0});
                            }
                        }
                        c.push_back({vx, M1});
                        add_row(RowFamily::XWindow, Sense::LE, M1, std::move(c), {h, i, q, t});
                    }

                    for (int tau = std::max(0, t - si); tau < t; ++tau)
                        if (cat.iw(h, i, tau) >= 0)
                            add_row(RowFamily::WBeforeX, Sense::GE, 0.0,
                                    {{cat.iw(h, i, tau), 1.0}, {vx, -1.0}}, {h, i, tau, t});
                    for (int tau = t; tau <= std::min(last, t + tq + sq); ++tau)
                        if (cat.iw(h, i, tau) >= 0)
                            add_row(RowFamily::WNotAfterX, Sense::LE, 1.0,
                                    {{cat.iw(h, i, tau), 1.0}, {vx, 1.0}}, {h, i, tau, t});

                    int a2 = t + tq;
                    add_row(RowFamily::SocX, Sense::LE, M1 - R(k, snode(i), q),
                            {{cat.isoc(h, a2), 1.0}, {cat.isoc(h, t), -1.0}, {vx, M1}},
                            {h, i, q, t});
                    add_row(RowFamily::SocX, Sense::GE, -M1 - R(k, snode(i), q),
                            {{cat.isoc(h, a2), 1.0}, {cat.isoc(h, t), -1.0}, {vx, -M1}},
                            {h, i, q, t});
                }

                // --- station departures toward shelter i ---
                for (int j = 0; j < J; ++j) {
                    int vz = cat.iz(h, j, i, t);
                    if (vz < 0) continue;
                    int tji = T(k, cnode(j), snode(i));
                    {
                        std::vector<std::pair<int, double>> c;
                        c.push_back({vz, 1.0});
                        for (int i2 = 0; i2 < I; ++i2) {
                            int tau = t - Sj(j) - T(k, snode(i2), cnode(j));
                            if (tau >= 0) c.push_back({cat.ix(h, i2, cnode(j), tau), -1.0});
                        }
                        add_row(RowFamily::ZPred, Sense::LE, 0.0, std::move(c), {h, j, i, t});
                    }
                    {
                        int d = t + tji + si;
                        std::vector<std::pair<int, double>> c;
                        for (int q2 = 0; q2 < cat.n_nodes; ++q2)
                            c.push_back({cat.ix(h, i, q2, d), 1.0});
                        c.push_back({cat.ir(h, i, d), 1.0});
                        c.push_back({vz, -1.0});
                        add_row(RowFamily::FollowZ, Sense::GE, 0.0, std::move(c), {h, j, i, t});
                    }
                    {
                        std::vector<std::pair<int, double>> c;
                        int lo = std::max(0, t - Sj(j)), hi = std::min(last, t + tji + si - 1);
                        for (int tau = lo; tau <= hi; ++tau)
                            for (int i2 = 0; i2 < I; ++i2) {
                                for (int j2 = 0; j2 < J; ++j2)
                                    if (j2 != j) c.push_back({cat.iz(h, j2, i2, tau), 1.0});
                                for (int q2 = 0; q2 < cat.n_nodes; ++q2)
                                    c.push_back({cat.ix(h, i2, q2, tau), 1.0});
                            }
                        c.push_back({vz, M1});
                        add_row(RowFamily::ZWindow, Sense::LE, M1, std::move(c), {h, j, i, t});
                    }
                    for (int tau = t; tau <= std::min(last, t + tji - 1); ++tau)
                        if (cat.iw(h, i, tau) >= 0)
                            add_row(RowFamily::WTravelZ, Sense::LE, 1.0,
                                    {{cat.iw(h, i, tau), 1.0}, {vz, 1.0}}, {h, j, tau, t});
                    for (int tau = t + tji; tau < t + tji + si; ++tau)
                        add_row(RowFamily::WServeZ, Sense::GE, 0.0,
                                {{cat.iw(h, i, tau), 1.0}, {vz, -1.0}}, {h, j, tau, t});

                    int a2 = t + tji;
                    add_row(RowFamily::SocZ, Sense::LE, tp.cap_max - R(k, cnode(j), snode(i)) + M1,
                            {{cat.isoc(h, a2), 1.0}, {vz, M1}}, {h, j, i, t});
                    add_row(RowFamily::SocZ, Sense::GE, tp.cap_max - R(k, cnode(j), snode(i)) - M1,
                            {{cat.isoc(h, a2), 1.0}, {vz, -M1}}, {h, j, i, t});
                }

                // --- discharge accounting at a shelter departure (summed trigger) ---
                if (t - si >= 0) {
                    std::vector<std::pair<int, double>> xs;
                    for (int q = 0; q < cat.n_nodes; ++q)
                        if (int vx = cat.ix(h, i, q, t); vx >= 0) xs.push_back({vx, M2});
                    if (!xs.empty()) {
                        std::vector<std::pair<int, double>> base;
                        base.push_back({cat.isoc(h, t), 1.0});
                        base.push_back({cat.isoc(h, t - si), -1.0});
                        for (int tau = t - si; tau < t; ++tau)
                            base.push_back({cat.ig(h, i, tau), 1.0});
                        auto le = base;
                        for (auto [v, c] : xs) le.push_back({v, c});
                        add_row(RowFamily::SocDepartX, Sense::LE, M2, std::move(le), {h, i, -1, t});
                        auto ge = base;
                        for (auto [v, c] : xs) ge.push_back({v, -c});
                        add_row(RowFamily::SocDepartX, Sense::GE, -M2, std::move(ge), {h, i, -1, t});
                    }
                }

                // --- serving rows ---
                if (int vw = cat.iw(h, i, t); vw >= 0) {
                    if (t + si < last) {
                        std::vector<std::pair<int, double>> c;
                        for (int tau = t + 1; tau <= t + si; ++tau) {
                            for (int q = 0; q < cat.n_nodes; ++q)
                                c.push_back({cat.ix(h, i, q, tau), 1.0});
                            c.push_back({cat.ir(h, i, tau), 1.0});
                        }
                        c.push_back({vw, -1.0});
                        add_row(RowFamily::DepartAfterServe, Sense::GE, 0.0, std::move(c),
                                {h, i, -1, t});
                    } else {
                        std::vector<std::pair<int, double>> c;
                        for (int i2 = 0; i2 < I; ++i2) {
                            if (i2 == i) continue;
                            int tv = T(k, snode(i2), snode(i));
                            for (int tau = std::max(0, t - tv - si); tau <= t - tv; ++tau)
                                if (tau >= 0) c.push_back({cat.ix(h, i2, snode(i), tau), 1.0});
                        }
                        for (int j = 0; j < J; ++j) {
                            int tv = T(k, cnode(j), snode(i));
                            for (int tau = std::max(0, t - tv - si); tau <= t - tv; ++tau)
                                if (tau >= 0) c.push_back({cat.iz(h, j, i, tau), 1.0});
                        }
                        int tv = T(k, 0, snode(i));
                        for (int tau = std::max(0, t - tv - si); tau <= t - tv; ++tau)
                            if (tau >= 0) c.push_back({cat.iu(h, i, tau), 1.0});
                        c.push_back({vw, -1.0});
                        add_row(RowFamily::ArriveBeforeServe, Sense::GE, 0.0, std::move(c),
                                {h, i, -1, t});
                    }
                    // discharge iff serving
                    add_row(RowFamily::GLink, Sense::GE, 0.0,
                            {{cat.ig(h, i, t), 1.0}, {vw, -tp.discharge_min}}, {h, i, -1, t});
                    // g <= M1*w and g <= usable combine into the tighter valid link
                    add_row(RowFamily::GLink, Sense::LE, 0.0,
                            {{cat.ig(h, i, t), 1.0}, {vw, -std::min(M1, tp.usable())}},
                            {h, i, -1, t});
                }

                // --- depot returns ---
                {
                    int vr = cat.ir(h, i, t);
                    for (int tau = std::max(0, t - si); tau < t; ++tau)
                        if (cat.iw(h, i, tau) >= 0)
                            add_row(RowFamily::ServeBeforeReturn, Sense::GE, 0.0,
                                    {{cat.iw(h, i, tau), 1.0}, {vr, -1.0}}, {h, i, tau, t});
                    if (t - si >= 0) {
                        std::vector<std::pair<int, double>> base;
                        base.push_back({cat.isoc(h, t), 1.0});
                        base.push_back({cat.isoc(h, t - si), -1.0});
                        for (int tau = t - si; tau < t; ++tau)
                            base.push_back({cat.ig(h, i, tau), 1.0});
                        auto le = base;
                        le.push_back({vr, M2});
                        add_row(RowFamily::SocDepartR, Sense::LE, M2, std::move(le), {h, i, -1, t});
                        auto ge = base;
                        ge.push_back({vr, -M2});
                        add_row(RowFamily::SocDepartR, Sense::GE, -M2, std::move(ge), {h, i, -1, t});
                    }
                    add_row(RowFamily::SocReturn, Sense::GE, tp.cap_min,
                            {{cat.isoc(h, t), 1.0}, {vr, -R(k, snode(i), 0)}}, {h, i, -1, t});
                }
            }
        }

        // at most one shelter served per slot (unordered pairs)
        for (int t = 0; t < last; ++t)
            for (int i = 0; i < I; ++i)
                for (int i2 = i + 1; i2 < I; ++i2)
                    add_row(RowFamily::OneShelter, Sense::LE, 1.0,
                            {{cat.iw(h, i, t), 1.0}, {cat.iw(h, i2, t), 1.0}}, {h, i, i2, t});

        // returns tie to departures
        for (int t = 0; t < n; ++t) {
            {
                std::vector<std::pair<int, double>> c;
                for (int i = 0; i < I; ++i)
                    for (int tau = 0; tau <= t; ++tau) {
                        c.push_back({cat.ir(h, i, tau), 1.0});
                        c.push_back({cat.iu(h, i, tau), -1.0});
                    }
                add_row(RowFamily::ReturnLeDepart, Sense::LE, 0.0, std::move(c), {h, -1, -1, t});
            }
            {
                bool any_u = false;
                for (int i = 0; i < I; ++i) any_u = any_u || m.cat.iu(h, i, t) >= 0;
                if (any_u) {
                    std::vector<std::pair<int, double>> c;
                    for (int i = 0; i < I; ++i) {
                        for (int tau = t + 1; tau < n; ++tau)
                            c.push_back({cat.ir(h, i, tau), 1.0});
                        c.push_back({cat.iu(h, i, t), -1.0});
                    }
                    add_row(RowFamily::ReturnAfterDepart, Sense::GE, 0.0, std::move(c),
                            {h, -1, -1, t});
                }
            }
            {
                std::vector<std::pair<int, double>> c;
                for (int tau = t; tau < n; ++tau)
                    for (int i = 0; i < I; ++i) {
                        c.push_back({cat.iw(h, i, tau), 1.0});
                        for (int j = 0; j < J; ++j) c.push_back({cat.iz(h, j, i, tau), 1.0});
                        for (int q = 0; q < cat.n_nodes; ++q)
                            c.push_back({cat.ix(h, i, q, tau), 1.0});
                    }
                for (int i = 0; i < I; ++i) c.push_back({cat.ir(h, i, t), M1});
                add_row(RowFamily::EndAfterReturn, Sense::LE, M1, std::move(c), {h, -1, -1, t});
            }
        }
    }

    // objective coefficients; the pricing variant folds the dual charges in
    double obj_u(int k, int i) const {
        double c = inst.types[k].invest_cost + inst.energy_cost * R(k, 0, snode(i));
        if (duals) c += duals->endpoint_charge(k, i) + duals->psi[k];
        return c;
    }
    double obj_r(int k, int i) const {
        double c = inst.energy_cost * R(k, snode(i), 0);
        if (duals) c += duals->endpoint_charge(k, i);
        return c;
    }
    double obj_x(int k, int i, int q) const {
        double c = inst.energy_cost * R(k, snode(i), q);
        if (duals && inst.network.is_station(q))
            c += duals->arc_charge(k, i, inst.network.station_of(q));
        return c;
    }
    double obj_z(int k, int j, int i) const {
        double c = inst.energy_cost * R(k, cnode(j), snode(i));
        if (duals) c += duals->arc_charge(k, i, j);
        return c;
    }
    double obj_w(int k, int i, int t) const {
        return duals ? duals->serve_charge(k, i, t) : 0.0;
    }
    double obj_g(int i, int t) const {
        return duals ? -duals->discharge_credit(i, t) : 0.0;
    }
};

} // namespace

CompactModel build_compact(const Instance& inst, const CompactOptions& opt) {
    Builder b(inst, opt);
    b.build();
    CompactModel m = std::move(b.m);
    if (opt.with_names) m.name_everything();
    return m;
}

CompactModel build_pricing_model(const Instance& inst, int type, const DualPrices& duals,
                                 bool shift) {
    if (!duals.shaped_for(inst))
        throw std::runtime_error("build_pricing_model: dual snapshot does not match the instance");
    CompactOptions opt;
    opt.with_shift = shift; // only affects the g credits, folded via duals.delta
    Builder b(inst, opt);
    b.duals = &duals;
    b.pricing_type = type;
    b.shift = false; // no shift rows in the subproblem
    b.build();
    return std::move(b.m);
}

void CompactModel::name_everything() {
    auto& c = cat;
    lp.col_name.assign(lp.n_vars(), "");
    auto set = [&](int id, std::string s) {
        if (id >= 0) lp.col_name[id] = std::move(s);
    };
    for (int h = 0; h < c.n_buses; ++h) {
        for (int i = 0; i < c.n_shelters; ++i)
            for (int t = 0; t < c.n_slots; ++t) {
                std::string suf = "[h" + std::to_string(h) + ",i" + std::to_string(i) + ",t" +
                                  std::to_string(t) + "]";
                set(c.iu(h, i, t), "u" + suf);
                set(c.iw(h, i, t), "w" + suf);
                set(c.ir(h, i, t), "r" + suf);
                set(c.ig(h, i, t), "g" + suf);
                for (int q = 0; q < c.n_nodes; ++q)
                    set(c.ix(h, i, q, t), "x[h" + std::to_string(h) + ",i" + std::to_string(i) +
                                              ",q" + std::to_string(q) + ",t" + std::to_string(t) +
                                              "]");
            }
        for (int j = 0; j < c.n_stations; ++j)
            for (int i = 0; i < c.n_shelters; ++i)
                for (int t = 0; t < c.n_slots; ++t)
                    set(c.iz(h, j, i, t), "z[h" + std::to_string(h) + ",j" + std::to_string(j) +
                                              ",i" + std::to_string(i) + ",t" + std::to_string(t) +
                                              "]");
        for (int t = 0; t < c.n_slots; ++t)
            set(c.isoc(h, t), "soc[h" + std::to_string(h) + ",t" + std::to_string(t) + "]");
    }
    for (int i = 0; i < c.n_shelters; ++i)
        if (!c.l.empty()) set(c.il(i), "l[i" + std::to_string(i) + "]");
    if (!c.l_shift.empty())
        for (int i = 0; i < c.n_shelters; ++i)
            for (int t = 0; t < c.n_slots; ++t)
                set(c.ilshift(i, t),
                    "lshift[i" + std::to_string(i) + ",t" + std::to_string(t) + "]");

    lp.row_name.assign(lp.n_rows(), "");
    for (int r = 0; r < lp.n_rows(); ++r) {
        const auto& tag = tags[r];
        std::string s = row_family_name(tag.fam) + "[";
        bool first = true;
        for (int v : tag.idx) {
            if (v < 0) continue;
            if (!first) s += ",";
            s += std::to_string(v);
            first = false;
        }
        s += "]#" + std::to_string(r);
        lp.row_name[r] = s;
    }
}

MilpSolution solve_compact(const CompactModel& model, double gap, int node_cap) {
    MilpOptions opt;
    opt.gap = gap;
    opt.node_cap = node_cap;
    MilpResult r = milp_solve(model.lp, model.is_int, opt);
    MilpSolution s;
    s.milp = r;
    s.objective = r.objective;
    s.bound = r.bound;
    s.proven = r.proven;
    s.x = r.x;
    return s;
}

std::vector<Route> extract_routes(const std::vector<double>& x, const CompactModel& model,
                                  const Instance& inst) {
    const auto& cat = model.cat;
    auto on = [&](int id) { return id >= 0 && x[id] > 0.5; };
    std::vector<Route> routes;
    for (int h = 0; h < cat.n_buses; ++h) {
        int k = cat.bus_type[h];
        int i0 = -1, t0 = -1;
        for (int i = 0; i < cat.n_shelters && i0 < 0; ++i)
            for (int t = 0; t < cat.n_slots; ++t)
                if (on(cat.iu(h, i, t))) {
                    i0 = i;
                    t0 = t;
                    break;
                }
        if (i0 < 0) continue;

        std::vector<VisitPlan> visits;
        std::vector<int> stations;
        int cur = i0;
        int arrive = t0 + inst.travel(k, 0, inst.network.shelter_node(i0));
        bool done = false;
        int safety = cat.n_slots * (cat.n_shelters + 2);
        while (!done && safety-- > 0) {
            int si = inst.network.service_shelter[cur];
            VisitPlan vp;
            vp.shelter = cur;
            for (int s = 0; s < si; ++s) {
                int id = cat.ig(h, cur, arrive + s);
                vp.g.push_back(id >= 0 ? std::max(0.0, x[id]) : 0.0);
            }
            visits.push_back(vp);
            int d = arrive + si;
            if (on(cat.ir(h, cur, d))) {
                done = true;
                break;
            }
            int next_q = -1;
            for (int q = 0; q < cat.n_nodes; ++q)
                if (on(cat.ix(h, cur, q, d))) {
                    if (next_q >= 0)
                        throw std::runtime_error("extract_routes: two departures at one slot");
                    next_q = q;
                }
            if (next_q < 0)
                throw std::runtime_error("extract_routes: visit has no follow-up departure");
            if (inst.network.is_station(next_q)) {
                int j = inst.network.station_of(next_q);
                int zslot = d + inst.travel(k, inst.network.shelter_node(cur), next_q) +
                            inst.network.service_station[j];
                int nxt = -1;
                for (int i2 = 0; i2 < cat.n_shelters; ++i2)
                    if (on(cat.iz(h, j, i2, zslot))) {
                        if (nxt >= 0)
                            throw std::runtime_error("extract_routes: two station departures");
                        nxt = i2;
                    }
                if (nxt < 0)
                    throw std::runtime_error("extract_routes: station visit has no departure");
                stations.push_back(j);
                cur = nxt;
                arrive = zslot + inst.travel(k, next_q, inst.network.shelter_node(cur));
            } else {
                stations.push_back(-1);
                int prev = cur;
                cur = inst.network.shelter_of(next_q);
                arrive = d + inst.travel(k, inst.network.shelter_node(prev), next_q);
            }
        }
        if (!done) throw std::runtime_error("extract_routes: route never returns to the depot");
        routes.push_back(build_route(inst, k, t0 + inst.horizon.first_slot, visits, stations));
    }
    return routes;
}

void export_lp(const CompactModel& model, const std::string& path) {
    CompactModel copy = model;
    copy.name_everything();
    write_lp_text(copy.lp, copy.is_int, path);
}

} // namespace esbilr
