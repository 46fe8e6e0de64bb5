#include "elmrules/miner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

namespace elmrules {

namespace {

int majority_class(long long pos, long long neg) {
    // ties resolve to -1 (unstable), matching the prediction tie rule
    return pos > neg ? 1 : -1;
}

ConfusionCounts counts_for(long long covered_pos, long long covered_neg, long long total_pos,
                           long long total_neg, int consequent) {
    ConfusionCounts c;
    if (consequent > 0) {
        c.tp = covered_pos;
        c.fp = covered_neg;
        c.fn = total_pos - covered_pos;
        c.tn = total_neg - covered_neg;
    } else {
        c.tp = covered_neg;
        c.fp = covered_pos;
        c.fn = total_neg - covered_neg;
        c.tn = total_pos - covered_pos;
    }
    return c;
}

// Majority consequent plus counts/quality for a fixed covered subset.
void finalize_rule(Rule& rule, long long covered_pos, long long covered_neg, long long total_pos,
                   long long total_neg) {
    rule.consequent = majority_class(covered_pos, covered_neg);
    rule.counts = counts_for(covered_pos, covered_neg, total_pos, total_neg, rule.consequent);
    rule.quality = rule_quality(rule.counts);
}

std::vector<Term> sorted_antecedent(const Rule& r) {
    std::vector<Term> t = r.antecedent;
    std::sort(t.begin(), t.end(), [](const Term& a, const Term& b) {
        return a.attribute != b.attribute ? a.attribute < b.attribute : a.value < b.value;
    });
    return t;
}

std::string format_number(double v, const char* fmt) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), fmt, v);
    return buf;
}

}  // namespace

TermSpace TermSpace::from_bins(const std::vector<int>& b) {
    TermSpace s;
    s.bins = b;
    s.offsets.resize(b.size());
    int acc = 0;
    for (std::size_t i = 0; i < b.size(); ++i) {
        if (b[i] < 1) throw Error("term space requires b_i >= 1");
        s.offsets[i] = acc;
        acc += b[i];
    }
    s.total_terms = acc;
    return s;
}

Term TermSpace::term(int linear_index) const {
    for (int a = attributes() - 1; a >= 0; --a) {
        if (linear_index >= offsets[a]) return Term{a, linear_index - offsets[a]};
    }
    throw Error("term index out of range");
}

bool Rule::matches(const DiscretizedDataset& dd, int row) const {
    for (const Term& t : antecedent)
        if (dd.bin(row, t.attribute) != t.value) return false;
    return true;
}

bool Rule::matches(std::span<const std::uint8_t> sample) const {
    for (const Term& t : antecedent)
        if (sample[t.attribute] != t.value) return false;
    return true;
}

bool Rule::same_form(const Rule& other) const {
    return consequent == other.consequent && sorted_antecedent(*this) == sorted_antecedent(other);
}

Classification RuleList::classify(std::span<const std::uint8_t> sample) const {
    if (static_cast<int>(sample.size()) != n_attributes)
        throw DimensionMismatch("rule list expects " + std::to_string(n_attributes) +
                                " attributes, sample has " + std::to_string(sample.size()));
    for (std::size_t i = 0; i < rules.size(); ++i)
        if (rules[i].matches(sample)) return {rules[i].consequent, static_cast<int>(i)};
    return {default_class, -1};
}

double RuleList::score(std::span<const std::uint8_t> sample) const {
    const Classification c = classify(sample);
    double confidence;
    if (c.fired_rule >= 0) {
        const ConfusionCounts& k = rules[c.fired_rule].counts;
        confidence = static_cast<double>(k.tp + 1) / static_cast<double>(k.tp + k.fp + 2);
    } else {
        confidence = static_cast<double>(default_match + 1) / static_cast<double>(default_total + 2);
    }
    return c.label * confidence;
}

double RuleList::terms_per_rule() const {
    if (rules.empty()) return 0.0;
    std::size_t total = 0;
    for (const Rule& r : rules) total += r.antecedent.size();
    return static_cast<double>(total) / static_cast<double>(rules.size());
}

double RuleList::training_accuracy(const DiscretizedDataset& dd) const {
    const int N = dd.n_samples();
    int correct = 0;
    for (int r = 0; r < N; ++r) {
        std::span<const std::uint8_t> row(dd.bins.data() + static_cast<std::size_t>(r) * dd.n,
                                          static_cast<std::size_t>(dd.n));
        if (classify(row).label == dd.labels[r]) ++correct;
    }
    return N == 0 ? 0.0 : static_cast<double>(correct) / N;
}

HeuristicKind heuristic_from_string(const std::string& s) {
    if (s == "entropy") return HeuristicKind::Entropy;
    if (s == "density") return HeuristicKind::Density;
    throw ConfigError("unknown heuristic '" + s + "'");
}

std::string to_string(HeuristicKind k) {
    return k == HeuristicKind::Entropy ? "entropy" : "density";
}

EvaporationMode evaporation_mode_from_string(const std::string& s) {
    if (s == "fixed") return EvaporationMode::Fixed;
    if (s == "adaptive") return EvaporationMode::Adaptive;
    throw ConfigError("unknown evaporation mode '" + s + "'");
}

std::string to_string(EvaporationMode m) {
    return m == EvaporationMode::Fixed ? "fixed" : "adaptive";
}

void MinerConfig::validate() const {
    if (n_ants < 1) throw ConfigError("n_ants must be positive");
    if (max_uncovered < 0) throw ConfigError("max_uncovered must be >= 0");
    if (min_cases_per_rule < 1) throw ConfigError("min_cases_per_rule must be positive");
    if (max_iterations < 1) throw ConfigError("max_iterations must be positive");
    if (convergence_window < 1) throw ConfigError("convergence_window must be positive");
    if (evaporation.rho <= 0.0 || evaporation.rho >= 1.0)
        throw ConfigError("rho must lie in (0,1)");
    if (evaporation.rho_min <= 0.0 || evaporation.rho_min >= 1.0)
        throw ConfigError("rho_min must lie in (0,1)");
    if (evaporation.mode == EvaporationMode::Adaptive &&
        1.0 - evaporation.rho < evaporation.rho_min)
        throw ConfigError("adaptive evaporation requires (1 - rho) >= rho_min");
}

PheromoneTable init_pheromone(const TermSpace& space) {
    if (space.total_terms < 1) throw Error("empty term space");
    PheromoneTable t;
    t.tau.assign(space.total_terms, 1.0 / space.total_terms);
    t.iteration = 0;
    return t;
}

double entropy_heuristic(const Term& term, const DiscretizedDataset& dd,
                         const std::vector<int>& remaining) {
    long long pos = 0, neg = 0;
    for (int s : remaining) {
        if (dd.bin(s, term.attribute) == term.value) (dd.labels[s] > 0 ? pos : neg)++;
    }
    const long long total = pos + neg;
    if (total == 0) return 0.0;
    double info = 0.0;
    for (long long freq : {pos, neg}) {
        if (freq == 0) continue;
        const double p = static_cast<double>(freq) / static_cast<double>(total);
        info -= p * std::log2(p);
    }
    return 1.0 - info;  // log2(k) with k = 2 classes
}

double density_heuristic(const Term& term, const DiscretizedDataset& dd,
                         const std::vector<int>& remaining) {
    if (remaining.empty()) return 0.0;
    long long covered = 0;
    for (int s : remaining)
        if (dd.bin(s, term.attribute) == term.value) ++covered;
    return static_cast<double>(covered) / static_cast<double>(remaining.size());
}

std::vector<double> compute_heuristics(const DiscretizedDataset& dd,
                                       const std::vector<int>& remaining, const TermSpace& space,
                                       HeuristicKind kind, long long* arith_ops) {
    std::vector<long long> pos(space.total_terms, 0), neg(space.total_terms, 0);
    for (int s : remaining) {
        const std::uint8_t* row = dd.bins.data() + static_cast<std::size_t>(s) * dd.n;
        const bool is_pos = dd.labels[s] > 0;
        for (int a = 0; a < dd.n; ++a) {
            const int idx = space.offsets[a] + row[a];
            (is_pos ? pos : neg)[idx]++;
        }
    }

    long long ops = 0;
    std::vector<double> eta(space.total_terms, 0.0);
    if (kind == HeuristicKind::Density) {
        const double denom = static_cast<double>(remaining.size());
        for (int t = 0; t < space.total_terms; ++t) {
            eta[t] = denom > 0 ? static_cast<double>(pos[t] + neg[t]) / denom : 0.0;
            ops += 1;  // one division per term
        }
    } else {
        for (int t = 0; t < space.total_terms; ++t) {
            const long long total = pos[t] + neg[t];
            if (total == 0) continue;
            double info = 0.0;
            for (long long freq : {pos[t], neg[t]}) {
                if (freq == 0) continue;
                const double p = static_cast<double>(freq) / static_cast<double>(total);
                info -= p * std::log2(p);
                ops += 3;  // divide, log, multiply-accumulate
            }
            eta[t] = 1.0 - info;
            ops += 1;
        }
    }
    if (arith_ops) *arith_ops += ops;
    return eta;
}

std::optional<std::vector<double>> term_probability(const PheromoneTable& tau,
                                                    const std::vector<double>& eta,
                                                    const std::vector<bool>& eligible) {
    if (tau.tau.size() != eta.size() || eta.size() != eligible.size())
        throw DimensionMismatch("pheromone/heuristic/eligibility size mismatch");
    std::vector<double> p(eta.size(), 0.0);
    double total = 0.0;
    for (std::size_t t = 0; t < eta.size(); ++t) {
        if (!eligible[t]) continue;
        p[t] = tau.tau[t] * eta[t];
        total += p[t];
    }
    if (total <= 0.0) return std::nullopt;  // NoEligibleTerm
    for (double& v : p) v /= total;
    return p;
}

double rule_quality(const ConfusionCounts& c) {
    const double sensitivity =
        c.tp + c.fn > 0 ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn) : 0.0;
    const double specificity =
        c.tn + c.fp > 0 ? static_cast<double>(c.tn) / static_cast<double>(c.tn + c.fp) : 0.0;
    return sensitivity * specificity;
}

Rule construct_rule(const DiscretizedDataset& dd, const std::vector<int>& remaining,
                    const PheromoneTable& tau, const std::vector<double>& heuristics,
                    const MinerConfig& cfg, Rng& rng) {
    if (remaining.empty()) throw Error("construct_rule requires remaining samples");
    const TermSpace space = TermSpace::from_bins(dd.b);

    long long total_pos = 0, total_neg = 0;
    for (int s : remaining) (dd.labels[s] > 0 ? total_pos : total_neg)++;

    std::vector<int> covered = remaining;
    long long covered_pos = total_pos, covered_neg = total_neg;
    std::vector<bool> attribute_used(dd.n, false);
    std::vector<int> cover_count(space.total_terms);
    std::vector<bool> eligible(space.total_terms);
    Rule rule;

    while (static_cast<int>(rule.antecedent.size()) < dd.n) {
        // coverage per candidate term within the current partial rule
        std::fill(cover_count.begin(), cover_count.end(), 0);
        for (int s : covered) {
            const std::uint8_t* row = dd.bins.data() + static_cast<std::size_t>(s) * dd.n;
            for (int a = 0; a < dd.n; ++a)
                if (!attribute_used[a]) ++cover_count[space.offsets[a] + row[a]];
        }
        for (int t = 0; t < space.total_terms; ++t) {
            const Term term = space.term(t);
            eligible[t] = !attribute_used[term.attribute] && cover_count[t] >= cfg.min_cases_per_rule;
        }

        auto probs = term_probability(tau, heuristics, eligible);
        if (!probs) break;  // no eligible term, stop extending

        const double u = rng.uniform01();
        double acc = 0.0;
        int chosen = -1;
        for (int t = 0; t < space.total_terms; ++t) {
            acc += (*probs)[t];
            if (u < acc) {
                chosen = t;
                break;
            }
        }
        if (chosen < 0) {  // u landed on accumulated rounding slack
            for (int t = space.total_terms - 1; t >= 0; --t)
                if ((*probs)[t] > 0.0) {
                    chosen = t;
                    break;
                }
        }

        const Term term = space.term(chosen);
        rule.antecedent.push_back(term);
        attribute_used[term.attribute] = true;

        std::vector<int> next;
        next.reserve(cover_count[chosen]);
        covered_pos = covered_neg = 0;
        for (int s : covered) {
            if (dd.bin(s, term.attribute) == term.value) {
                next.push_back(s);
                (dd.labels[s] > 0 ? covered_pos : covered_neg)++;
            }
        }
        covered = std::move(next);
    }

    finalize_rule(rule, covered_pos, covered_neg, total_pos, total_neg);
    return rule;
}

Rule prune_rule(const Rule& rule, const DiscretizedDataset& dd, const std::vector<int>& remaining) {
    if (rule.antecedent.size() <= 1) return rule;

    long long total_pos = 0, total_neg = 0;
    for (int s : remaining) (dd.labels[s] > 0 ? total_pos : total_neg)++;

    Rule current = rule;
    while (current.antecedent.size() > 1) {
        const int t = static_cast<int>(current.antecedent.size());
        // One pass classifies each sample by how many terms it misses:
        // zero misses -> covered by every removal variant, exactly one
        // miss at k -> covered only when term k is the one removed.
        std::vector<long long> extra_pos(t, 0), extra_neg(t, 0);
        long long base_pos = 0, base_neg = 0;
        for (int s : remaining) {
            int mismatches = 0, where = -1;
            const std::uint8_t* row = dd.bins.data() + static_cast<std::size_t>(s) * dd.n;
            for (int k = 0; k < t; ++k) {
                const Term& term = current.antecedent[k];
                if (row[term.attribute] != term.value) {
                    where = k;
                    if (++mismatches > 1) break;
                }
            }
            if (mismatches == 0)
                (dd.labels[s] > 0 ? base_pos : base_neg)++;
            else if (mismatches == 1)
                (dd.labels[s] > 0 ? extra_pos : extra_neg)[where]++;
        }

        int best_k = -1;
        Rule best_variant;
        for (int k = 0; k < t; ++k) {
            Rule variant;
            finalize_rule(variant, base_pos + extra_pos[k], base_neg + extra_neg[k], total_pos,
                          total_neg);
            if (best_k < 0 || variant.quality > best_variant.quality) {
                best_k = k;
                best_variant = std::move(variant);
            }
        }
        if (best_variant.quality <= current.quality) break;

        best_variant.antecedent = current.antecedent;
        best_variant.antecedent.erase(best_variant.antecedent.begin() + best_k);
        current = std::move(best_variant);
    }
    return current;
}

PheromoneTable update_pheromone(const PheromoneTable& tau, const Rule& best,
                                const EvaporationPolicy& policy, const TermSpace& space,
                                bool normalize) {
    PheromoneTable out = tau;
    const double retain = 1.0 - policy.rho;
    for (double& v : out.tau) v *= retain;
    const double reinforce = best.quality / (1.0 + best.quality);
    for (const Term& t : best.antecedent) {
        const int idx = space.linear(t);
        out.tau[idx] += reinforce * tau.tau[idx];
    }
    if (normalize) {
        const double sum = std::accumulate(out.tau.begin(), out.tau.end(), 0.0);
        if (sum > 0.0)
            for (double& v : out.tau) v /= sum;
    }
    ++out.iteration;
    return out;
}

EvaporationPolicy adapt_evaporation(const EvaporationPolicy& policy) {
    EvaporationPolicy out = policy;
    const double retention = 0.95 * (1.0 - policy.rho);
    out.rho = 1.0 - std::max(retention, policy.rho_min);
    return out;
}

Rule mine_one_rule(const DiscretizedDataset& dd, const std::vector<int>& remaining,
                   const MinerConfig& cfg, std::uint64_t round_seed, PheromoneTable* carry,
                   long long* heuristic_ops) {
    const TermSpace space = TermSpace::from_bins(dd.b);
    const std::vector<double> eta =
        compute_heuristics(dd, remaining, space, cfg.heuristic, heuristic_ops);

    PheromoneTable tau;
    if (carry && static_cast<int>(carry->tau.size()) == space.total_terms)
        tau = *carry;
    else
        tau = init_pheromone(space);
    EvaporationPolicy policy = cfg.evaporation;

    // Pruning depends only on the antecedent and the remaining set, so
    // repeat constructions (frequent after convergence) are memoized.
    std::map<std::vector<std::pair<int, int>>, Rule> prune_memo;
    auto pruned = [&](Rule&& raw) {
        std::vector<std::pair<int, int>> key;
        key.reserve(raw.antecedent.size());
        for (const Term& term : raw.antecedent) key.emplace_back(term.attribute, term.value);
        std::sort(key.begin(), key.end());
        auto it = prune_memo.find(key);
        if (it != prune_memo.end()) return it->second;
        Rule result = prune_rule(raw, dd, remaining);
        prune_memo.emplace(std::move(key), result);
        return result;
    };

    Rule best_overall;
    bool have_best = false;
    Rule last_best;
    int run_length = 0;

    for (int iter = 0; iter < cfg.max_iterations; ++iter) {
        Rule iter_best;
        bool have_iter = false;
        for (int ant = 0; ant < cfg.n_ants; ++ant) {
            Rng ant_rng(derive_seed(round_seed, "ant",
                                    static_cast<std::uint64_t>(iter) * cfg.n_ants + ant));
            Rule r = pruned(construct_rule(dd, remaining, tau, eta, cfg, ant_rng));
            if (!have_iter || r.quality > iter_best.quality) {
                iter_best = std::move(r);
                have_iter = true;
            }
        }

        tau = update_pheromone(tau, iter_best, policy, space, cfg.normalize_pheromone);
        if (policy.mode == EvaporationMode::Adaptive) policy = adapt_evaporation(policy);

        if (iter > 0 && iter_best.same_form(last_best))
            ++run_length;
        else
            run_length = 1;
        last_best = iter_best;

        if (!have_best || iter_best.quality > best_overall.quality) {
            best_overall = iter_best;
            have_best = true;
        }
        if (run_length >= cfg.convergence_window) break;
    }

    if (carry) *carry = tau;
    return best_overall;
}

RuleList mine(const DiscretizedDataset& dd, const MinerConfig& cfg) {
    cfg.validate();
    if (dd.n_samples() == 0) throw Error("cannot mine an empty dataset");

    std::vector<int> remaining(dd.n_samples());
    std::iota(remaining.begin(), remaining.end(), 0);

    RuleList list;
    list.n_attributes = dd.n;
    PheromoneTable carry;

    int round = 0;
    while (static_cast<int>(remaining.size()) > cfg.max_uncovered) {
        const std::uint64_t round_seed = derive_seed(cfg.seed, "round", round++);
        Rule best = mine_one_rule(dd, remaining, cfg, round_seed,
                                  cfg.reinit_pheromone ? nullptr : &carry);
        // an empty antecedent or a zero-quality best rule carries nothing
        // beyond the default class; stop covering
        if (best.antecedent.empty() || best.quality <= 0.0) break;

        std::vector<int> keep;
        keep.reserve(remaining.size());
        for (int s : remaining)
            if (!best.matches(dd, s)) keep.push_back(s);
        if (keep.size() == remaining.size()) break;  // no coverage, avoid livelock

        list.rules.push_back(std::move(best));
        remaining = std::move(keep);
    }

    long long pos = 0, neg = 0;
    if (remaining.empty()) {
        for (int l : dd.labels) (l > 0 ? pos : neg)++;
        list.default_class = majority_class(pos, neg);
        list.default_match = 0;
        list.default_total = 0;
    } else {
        for (int s : remaining) (dd.labels[s] > 0 ? pos : neg)++;
        list.default_class = majority_class(pos, neg);
        list.default_match = list.default_class > 0 ? pos : neg;
        list.default_total = static_cast<long long>(remaining.size());
    }
    return list;
}

std::string render_rule_list(const RuleList& list, const RuleDisplay& display) {
    std::ostringstream out;
    auto interval = [&](const Term& t) {
        const auto& e = display.edges[t.attribute];
        const double lo = t.value == 0 ? display.lo[t.attribute] : e[t.value - 1];
        const double hi =
            t.value == static_cast<int>(e.size()) ? display.hi[t.attribute] : e[t.value];
        return "[" + format_number(lo, "%.6g") + "," + format_number(hi, "%.6g") + ")";
    };
    for (const Rule& r : list.rules) {
        out << "IF ";
        for (std::size_t i = 0; i < r.antecedent.size(); ++i) {
            if (i > 0) out << " AND ";
            const Term& t = r.antecedent[i];
            out << display.names[t.attribute] << " in " << interval(t);
        }
        if (r.antecedent.empty()) out << "true";
        out << " THEN class=" << (r.consequent > 0 ? "+1" : "-1");
        out << " (Q=" << format_number(r.quality, "%.4f") << ", cover="
            << (r.counts.tp + r.counts.fp) << ")\n";
    }
    out << "DEFAULT class=" << (list.default_class > 0 ? "+1" : "-1") << "\n";
    return out.str();
}

std::string rule_list_to_json(const RuleList& list) {
    nlohmann::ordered_json j;
    j["rules"] = nlohmann::ordered_json::array();
    for (const Rule& r : list.rules) {
        nlohmann::ordered_json jr;
        jr["terms"] = nlohmann::ordered_json::array();
        for (const Term& t : r.antecedent)
            jr["terms"].push_back({{"attribute", t.attribute}, {"value", t.value}});
        jr["consequent"] = r.consequent;
        jr["quality"] = r.quality;
        jr["counts"] = {{"tp", r.counts.tp}, {"fp", r.counts.fp}, {"fn", r.counts.fn},
                        {"tn", r.counts.tn}};
        j["rules"].push_back(std::move(jr));
    }
    j["default_class"] = list.default_class;
    j["default_match"] = list.default_match;
    j["default_total"] = list.default_total;
    j["n_attributes"] = list.n_attributes;
    return j.dump(2);
}

RuleList rule_list_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("rule list JSON parse failure: ") + e.what());
    }
    RuleList list;
    for (const auto& jr : j.at("rules")) {
        Rule r;
        for (const auto& jt : jr.at("terms"))
            r.antecedent.push_back({jt.at("attribute").get<int>(), jt.at("value").get<int>()});
        r.consequent = jr.at("consequent").get<int>();
        r.quality = jr.at("quality").get<double>();
        const auto& c = jr.at("counts");
        r.counts = {c.at("tp").get<long long>(), c.at("fp").get<long long>(),
                    c.at("fn").get<long long>(), c.at("tn").get<long long>()};
        list.rules.push_back(std::move(r));
    }
    list.default_class = j.at("default_class").get<int>();
    list.default_match = j.at("default_match").get<long long>();
    list.default_total = j.at("default_total").get<long long>();
    list.n_attributes = j.at("n_attributes").get<int>();
    return list;
}

}  // namespace elmrules
