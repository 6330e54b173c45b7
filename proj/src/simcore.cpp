#include "cogwifi/simcore.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "cogwifi/error.hpp"

namespace cogwifi {

void RssRegister::push(int t, double rss) {
    if (count_ > 0 && t <= newest().t) throw ValidationError("RssRegister: samples must be pushed in time order");
    expire(t);
    if (count_ == kWindow) {
        head_ = (head_ + 1) % kWindow;
        --count_;
    }
    buf_[(head_ + count_) % kWindow] = {t, rss};
    ++count_;
}

void RssRegister::expire(int now) {
    while (count_ > 0 && at(0).t <= now - kWindow) {
        head_ = (head_ + 1) % kWindow;
        --count_;
    }
}

bool RssRegister::window(std::array<double, kWindow>& out) const {
    if (count_ == 0) return false;
    const std::size_t pad = kWindow - count_;
    for (std::size_t i = 0; i < pad; ++i) out[i] = at(0).rss_dbm;
    for (std::size_t i = 0; i < count_; ++i) out[pad + i] = at(i).rss_dbm;
    return true;
}

BssAllocation bss_throughput_mbps(std::span<const BssMember> members, double efficiency) {
    BssAllocation out;
    out.per_sta_mbps.assign(members.size(), 0.0);
    // Airtime each member needs to carry its whole demand.
    std::vector<std::pair<double, std::size_t>> need;
    for (std::size_t i = 0; i < members.size(); ++i) {
        const auto& m = members[i];
        if (m.phy_rate_mbps > 0.0 && m.demand_mbps > 0.0)
            need.emplace_back(m.demand_mbps / (efficiency * m.phy_rate_mbps), i);
    }
    std::stable_sort(need.begin(), need.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });

    double airtime = 1.0;
    for (std::size_t j = 0; j < need.size(); ++j) {
        const double share = std::max(airtime, 0.0) / static_cast<double>(need.size() - j);
        const auto [want, i] = need[j];
        if (want <= share) {
            out.per_sta_mbps[i] = members[i].demand_mbps;
            airtime -= want;
            continue;
        }
        for (std::size_t k = j; k < need.size(); ++k) {
            const auto& m = members[need[k].second];
            out.per_sta_mbps[need[k].second] = share * efficiency * m.phy_rate_mbps;
        }
        break;
    }
    for (double v : out.per_sta_mbps) out.total_mbps += v;
    return out;
}

namespace {

constexpr double kPacketBits = kPacketBytes * 8.0;

void check_policies(const Policies& p) {
    if (p.handover.kind == HandoverPolicyKind::Proposed && !p.handover.model)
        throw ValidationError("missing model: the proposed handover policy needs a trained forest (--model)");
    if (p.ap_selection.kind == ApPolicyKind::Proposed && !p.ap_selection.model)
        throw ValidationError("missing model: the proposed AP selection policy needs a trained regressor (--model)");
}

} // namespace

Simulator::Simulator(ScenarioConfig cfg, Policies policies, const RateTable& table)
    : cfg_(std::move(cfg)), policies_(std::move(policies)), table_(table) {
    validate(cfg_);
    check_policies(policies_);
    const std::size_t n_sta = cfg_.stations.size(), n_ap = cfg_.aps.size();
    for (const auto& a : cfg_.aps) log_.ap_ids.push_back(a.id);
    for (const auto& s : cfg_.stations) {
        log_.sta_ids.push_back(s.id);
        sta_.push_back({Trajectory(s.mobility, rng::derive(cfg_.seed, "mobility", static_cast<std::uint64_t>(s.id))),
                        {}, 0.0, false});
        assoc_.push_back({s.id, -1, 0});
    }
    log_.t1_dbm = cfg_.t1_dbm;
    log_.t2_dbm = cfg_.t2_dbm;
    log_.noise_floor_dbm = cfg_.radio.noise_floor_dbm;
    links_.reserve(n_sta * n_ap);
    for (const auto& s : cfg_.stations)
        for (const auto& a : cfg_.aps)
            links_.push_back({rng::make_engine(cfg_.seed, "shadow", static_cast<std::uint64_t>(s.id),
                                               static_cast<std::uint64_t>(a.id)),
                              std::normal_distribution<double>(0.0, 1.0), 0.0});
    rss_.assign(n_sta * n_ap, 0.0);
    pos_.assign(n_sta, Position{});
    registers_.assign(n_sta * n_ap, RssRegister{});
    ap_window_.assign(n_ap, ApWindow{});
    ctl_.stations.assign(n_sta, StationControl{});
    log_.ticks.reserve(static_cast<std::size_t>(cfg_.duration_s));
}

std::size_t Simulator::ap_idx(int ap_id) const { return log_.ap_index(ap_id); }
std::size_t Simulator::sta_idx(int sta_id) const { return log_.sta_index(sta_id); }

const Association& Simulator::association(int sta_id) const { return assoc_[sta_idx(sta_id)]; }

const RssRegister& Simulator::rss_register(int sta_id, int ap_id) const {
    return registers_[sta_idx(sta_id) * cfg_.aps.size() + ap_idx(ap_id)];
}

double Simulator::rate_of(std::size_t s, std::size_t a) const {
    return phy_rate_mbps(snr_db(rss_[s * cfg_.aps.size() + a], cfg_.radio.noise_floor_dbm), table_);
}

int Simulator::clients_of(std::size_t a) const {
    const int id = cfg_.aps[a].id;
    return static_cast<int>(std::count_if(assoc_.begin(), assoc_.end(), [id](const Association& x) {
        return x.ap_id == id;
    }));
}

void Simulator::sample_links() {
    const std::size_t n_ap = cfg_.aps.size();
    const double rho = cfg_.radio.shadowing_corr;
    const double innovation = std::sqrt(1.0 - rho * rho);
    const WallLosses losses{cfg_.building.external_wall_loss_db, cfg_.building.internal_wall_loss_db};
    RadioParams radio = cfg_.radio;
    for (std::size_t s = 0; s < sta_.size(); ++s) {
        pos_[s] = sta_[s].trajectory.at(static_cast<double>(now_));
        for (std::size_t a = 0; a < n_ap; ++a) {
            auto& link = links_[s * n_ap + a];
            const double z = link.normal(link.engine);
            link.draw = now_ == 0 ? z : rho * link.draw + innovation * z;
            const auto& ap = cfg_.aps[a];
            const auto walls = wall_count(pos_[s], ap.pos, cfg_.building);
            radio.tx_power_mw = ap.tx_power_mw;
            const double r = rss_dbm(radio, distance(pos_[s], ap.pos), walls.external, walls.internal, losses, link.draw);
            rss_[s * n_ap + a] = r;
            auto& reg = registers_[s * n_ap + a];
            if (rate_of(s, a) > 0.0)
                reg.push(now_, r);
            else
                reg.expire(now_);
        }
    }
}

std::optional<ApSelectionSample> Simulator::window_sample(std::size_t a, std::optional<std::size_t> joining,
                                                          std::optional<std::size_t> leaving) const {
    const auto& win = ap_window_[a];
    std::vector<double> snr, delay;
    for (std::size_t i = 0; i < win.snr_db.size(); ++i) {
        if (leaving && win.sta[i] == *leaving) continue;
        snr.push_back(win.snr_db[i]);
        delay.push_back(win.mac_delay_s[i]);
    }
    int n = clients_of(a) - (leaving ? 1 : 0);
    if (joining) {
        const std::size_t s = *joining;
        const double rate = rate_of(s, a);
        if (rate <= 0.0) return std::nullopt;
        const double own_snr = snr_db(rss_[s * cfg_.aps.size() + a], cfg_.radio.noise_floor_dbm);
        const double backlog = std::max<double>(1.0, static_cast<double>(sta_[s].queue.size()));
        const double own_delay = backlog * kPacketBits / (rate * 1e6);
        // The newcomer contributes its fair share of the window's packets.
        const std::size_t copies =
            snr.empty() ? 1 : std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(
                                                          static_cast<double>(snr.size()) / std::max(n, 1))));
        snr.insert(snr.end(), copies, own_snr);
        delay.insert(delay.end(), copies, own_delay);
        ++n;
    }
    if (snr.empty() || n < 1) return std::nullopt;
    ApSelectionSample row;
    row.n_clients = n;
    row.snr = stats5(snr);
    row.mac_delay = stats5(delay);
    return row;
}

std::vector<ApCandidate> Simulator::candidates(std::size_t s, double min_rss, int exclude_ap) const {
    std::vector<ApCandidate> out;
    const bool need_features = policies_.ap_selection.kind == ApPolicyKind::Proposed;
    for (std::size_t a = 0; a < cfg_.aps.size(); ++a) {
        const int id = cfg_.aps[a].id;
        const double r = rss_[s * cfg_.aps.size() + a];
        if (id == exclude_ap || !(r > min_rss) || rate_of(s, a) <= 0.0) continue;
        ApCandidate c;
        c.ap_id = id;
        c.rss_dbm = r;
        // The serving AP is scored as it is now against itself without the station.
        const bool serving = id == assoc_[s].ap_id;
        c.n_clients = clients_of(a) - (serving ? 1 : 0);
        if (need_features) {
            c.with_request = serving ? window_sample(a, std::nullopt) : window_sample(a, s);
            c.current = serving ? window_sample(a, std::nullopt, s) : window_sample(a, std::nullopt);
        }
        out.push_back(std::move(c));
    }
    return out;
}

void Simulator::execute_handover(int sta_id, int to_ap, HandoverCause cause) {
    const std::size_t s = sta_idx(sta_id);
    ap_idx(to_ap);   // throws for unknown AP ids
    auto& as = assoc_[s];
    if (as.ap_id < 0) throw ValidationError("station " + std::to_string(sta_id) + " is not associated");
    if (as.ap_id == to_ap) throw ValidationError("no-op handover rejected");
    log_.handovers.push_back({now_, sta_id, as.ap_id, to_ap, cause});
    as.ap_id = to_ap;
    as.since_s = now_;
    sta_[s].in_handover = true;
    ctl_.stations[s].armed = false;
}

void Simulator::check_degradation(std::size_t s) {
    const auto& rs = cfg_.reselection;
    auto& st = ctl_.stations[s];
    const double demand = cfg_.stations[s].demand_mbps;
    if (!rs.enabled || !(demand > 0.0)) return;
    const double backlog = static_cast<double>(sta_[s].queue.size()) * kPacketBits / (demand * 1e6);
    st.degraded_ticks = backlog > rs.backlog_s ? st.degraded_ticks + 1 : 0;
    if (st.degraded_ticks < rs.ticks || now_ < st.reselect_after_t) return;

    const int sta_id = cfg_.stations[s].id;
    ctl_.triggers.push_back({TriggerKind::PerformanceDegradation, sta_id, now_, "backlog_s", backlog, rs.backlog_s});
    st.degraded_ticks = 0;
    st.reselect_after_t = now_ + rs.holdoff_s;
    const auto cands = candidates(s, cfg_.t1_dbm, -1);
    if (cands.empty()) return;
    const int to = select_ap(policies_.ap_selection, cands);
    if (to != assoc_[s].ap_id) execute_handover(sta_id, to, HandoverCause::Reselection);
}

void Simulator::run_controller() {
    const std::size_t n_ap = cfg_.aps.size();
    for (std::size_t s = 0; s < sta_.size(); ++s) {
        const int sta_id = cfg_.stations[s].id;
        auto& as = assoc_[s];
        if (as.ap_id < 0) {
            const auto cands = candidates(s, -std::numeric_limits<double>::infinity(), -1);
            if (cands.empty()) continue;
            as.ap_id = select_ap(policies_.ap_selection, cands);
            as.since_s = now_;
            ctl_.stations[s] = StationControl{};
            ctl_.triggers.push_back({TriggerKind::TopologyChange, sta_id, now_, "association", 0.0, 0.0});
            continue;
        }

        const std::size_t a = ap_idx(as.ap_id);
        const double r = rss_[s * n_ap + a];
        auto& st = ctl_.stations[s];
        const auto action = on_beacon(st, r, cfg_.t1_dbm, cfg_.t2_dbm);
        if (auto trig = trigger_for(action, sta_id, now_, r, cfg_.t1_dbm, cfg_.t2_dbm)) ctl_.triggers.push_back(*trig);
        if (action == BeaconAction::None) check_degradation(s);
        if (action != BeaconAction::ForceHandover && action != BeaconAction::Arm
            && action != BeaconAction::RunPrediction)
            continue;

        DecisionRecord rec;
        rec.t = now_;
        rec.sta_id = sta_id;
        rec.ap_id = as.ap_id;
        if (!registers_[s * n_ap + a].window(rec.window)) rec.window.fill(r);
        st.last_decision_t = now_;
        const auto cands = candidates(s, r, as.ap_id);

        if (action == BeaconAction::ForceHandover) {
            rec.kind = DecisionKind::Forced;
            rec.handover = true;
            log_.decisions.push_back(rec);
            if (cands.empty()) {
                as.ap_id = -1;
                as.since_s = now_;
                st.armed = false;
                continue;
            }
            execute_handover(sta_id, select_ap(policies_.ap_selection, cands), HandoverCause::ForcedT2);
            continue;
        }

        const auto d = decide_handover(policies_.handover, rec.window, cands, cfg_.t2_dbm, cfg_.radio,
                                       log_.predictor_calls);
        rec.kind = DecisionKind::Prediction;
        rec.handover = d.handover;
        log_.decisions.push_back(rec);
        if (d.handover && !cands.empty()) {
            const auto cause = policies_.handover.kind == HandoverPolicyKind::Proposed ? HandoverCause::Predicted
                                                                                       : HandoverCause::Baseline;
            execute_handover(sta_id, select_ap(policies_.ap_selection, cands), cause);
        }
    }
}

void Simulator::serve_traffic(TickRecord& rec) {
    const std::size_t n_ap = cfg_.aps.size();
    const double t0 = now_, t_end = now_ + 1.0;

    for (std::size_t s = 0; s < sta_.size(); ++s) {
        auto& st = sta_[s];
        const double lambda = cfg_.stations[s].demand_mbps * 1e6 / kPacketBits;
        auto eng = rng::make_engine(cfg_.seed, "traffic", static_cast<std::uint64_t>(cfg_.stations[s].id),
                                    static_cast<std::uint64_t>(now_));
        std::poisson_distribution<int> count(lambda);
        std::uniform_real_distribution<double> when(t0, t_end);
        std::vector<double> arrivals(lambda > 0.0 ? static_cast<std::size_t>(count(eng)) : 0);
        for (auto& v : arrivals) v = when(eng);
        std::sort(arrivals.begin(), arrivals.end());
        if (assoc_[s].ap_id < 0) {
            st.queue.clear();
            continue;
        }
        for (double v : arrivals)
            if (st.queue.size() < static_cast<std::size_t>(kQueueCapacity)) st.queue.push_back(v);
    }

    rec.sta_throughput_mbps.assign(sta_.size(), 0.0);
    rec.bss_throughput_mbps.assign(n_ap, 0.0);
    for (std::size_t a = 0; a < n_ap; ++a) {
        const int ap_id = cfg_.aps[a].id;
        std::vector<std::size_t> who;
        std::vector<BssMember> members;
        for (std::size_t s = 0; s < sta_.size(); ++s) {
            if (assoc_[s].ap_id != ap_id || sta_[s].in_handover) continue;
            who.push_back(s);
            members.push_back({cfg_.stations[s].id, rate_of(s, a),
                               static_cast<double>(sta_[s].queue.size()) * kPacketBits / 1e6});
        }
        const auto alloc = bss_throughput_mbps(members);

        const std::size_t m = who.size();
        std::vector<std::size_t> quota(m), sent(m, 0);
        std::vector<double> service(m);
        for (std::size_t i = 0; i < m; ++i) {
            auto& st = sta_[who[i]];
            const double credit = alloc.per_sta_mbps[i] * 1e6 / kPacketBits + st.carry;
            const auto whole = static_cast<std::size_t>(std::floor(credit + 1e-9));
            quota[i] = std::min(whole, st.queue.size());
            st.carry = quota[i] == whole ? std::clamp(credit - static_cast<double>(whole), 0.0, 1.0) : 0.0;
            service[i] = members[i].phy_rate_mbps > 0.0 ? kPacketBits / (kMacEfficiency * members[i].phy_rate_mbps * 1e6)
                                                        : 0.0;
        }

        // Work-conserving single server: among stations with a packet ready,
        // serve the one furthest behind its quota.
        auto& win = ap_window_[a];
        win.snr_db.clear();
        win.mac_delay_s.clear();
        win.sta.clear();
        double clock = t0;
        long delivered_bytes = 0;
        for (;;) {
            std::size_t pick = m;
            double pick_key = 0.0, next_ready = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < m; ++i) {
                if (sent[i] >= quota[i]) continue;
                const double ts = sta_[who[i]].queue[sent[i]];
                if (ts > clock) {
                    next_ready = std::min(next_ready, ts);
                    continue;
                }
                const double key = (static_cast<double>(sent[i]) + 0.5) / static_cast<double>(quota[i]);
                if (pick == m || key < pick_key) {
                    pick = i;
                    pick_key = key;
                }
            }
            if (pick == m) {
                if (!std::isfinite(next_ready)) break;
                clock = next_ready;
                continue;
            }
            const double done = clock + service[pick];
            if (done > t_end) {
                quota[pick] = sent[pick];
                continue;
            }
            const auto& q = sta_[who[pick]].queue;
            const auto waiting = static_cast<int>(std::upper_bound(q.begin(), q.end(), clock) - q.begin())
                                 - static_cast<int>(sent[pick]);
            PacketEvent p;
            p.timestamp_s = q[sent[pick]];
            p.arrival_time_s = done;
            p.snr_db = snr_db(rss_[who[pick] * n_ap + a], cfg_.radio.noise_floor_dbm);
            p.ap_id = ap_id;
            p.sta_id = cfg_.stations[who[pick]].id;
            p.mac_queue_len = waiting;
            win.snr_db.push_back(p.snr_db);
            win.mac_delay_s.push_back(mac_delay_s(p, table_));
            win.sta.push_back(who[pick]);
            if (cfg_.record_packets) log_.packets.push_back(p);
            delivered_bytes += p.size_bytes;
            ++sent[pick];
            clock = done;
        }

        for (std::size_t i = 0; i < m; ++i) {
            auto& q = sta_[who[i]].queue;
            q.erase(q.begin(), q.begin() + static_cast<long>(sent[i]));
            rec.sta_throughput_mbps[who[i]] = static_cast<double>(sent[i]) * kPacketBits / 1e6;
        }
        rec.bss_throughput_mbps[a] = static_cast<double>(delivered_bytes) * 8.0 / 1e6;
    }
}

void Simulator::tick() {
    if (finished()) return;
    for (auto& s : sta_) s.in_handover = false;
    sample_links();
    run_controller();

    TickRecord rec;
    rec.t = now_;
    rec.positions = pos_;
    rec.rss_dbm = rss_;
    serve_traffic(rec);
    rec.serving.resize(sta_.size());
    for (std::size_t s = 0; s < sta_.size(); ++s) rec.serving[s] = assoc_[s].ap_id;
    rec.bss_clients.resize(cfg_.aps.size());
    for (std::size_t a = 0; a < cfg_.aps.size(); ++a) rec.bss_clients[a] = clients_of(a);
    log_.ticks.push_back(std::move(rec));
    ++now_;
}

SimulationLog run(const ScenarioConfig& cfg, const Policies& policies) {
    Simulator sim(cfg, policies);
    while (!sim.finished()) sim.tick();
    return sim.take_log();
}

} // namespace cogwifi
