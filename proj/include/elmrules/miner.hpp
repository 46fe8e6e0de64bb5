#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "elmrules/dataset.hpp"
#include "elmrules/metrics.hpp"
#include "elmrules/rng.hpp"

namespace elmrules {

// A rule condition of the form attribute == bin value.
struct Term {
    int attribute = 0;
    int value = 0;

    bool operator==(const Term&) const = default;
};

// Enumerated term universe with a dense linear indexing.
struct TermSpace {
    std::vector<int> bins;     // value-domain size per attribute
    std::vector<int> offsets;  // prefix sums of bins
    int total_terms = 0;

    static TermSpace from_bins(const std::vector<int>& b);
    int attributes() const { return static_cast<int>(bins.size()); }
    int linear(const Term& t) const { return offsets[t.attribute] + t.value; }
    Term term(int linear_index) const;
};

struct PheromoneTable {
    std::vector<double> tau;  // indexed by TermSpace linear index
    int iteration = 0;
};

enum class EvaporationMode { Fixed, Adaptive };

struct EvaporationPolicy {
    EvaporationMode mode = EvaporationMode::Adaptive;
    double rho = 0.85;
    double rho_min = 0.05;
};

enum class HeuristicKind { Entropy, Density };

HeuristicKind heuristic_from_string(const std::string& s);
std::string to_string(HeuristicKind k);
EvaporationMode evaporation_mode_from_string(const std::string& s);
std::string to_string(EvaporationMode m);

// Conjunctive rule over binned attributes, at most one term per attribute.
// counts/quality refer to the remaining-set snapshot the rule was mined on.
struct Rule {
    std::vector<Term> antecedent;
    int consequent = -1;
    double quality = 0.0;
    ConfusionCounts counts;

    bool matches(const DiscretizedDataset& dd, int row) const;
    bool matches(std::span<const std::uint8_t> sample) const;
    bool same_form(const Rule& other) const;  // sorted antecedent + consequent
};

struct Classification {
    int label = -1;
    int fired_rule = -1;  // -1 means the default fired
};

// Ordered rule list with first-match semantics and a default class. The
// default's Laplace score uses the residual cases left after mining.
struct RuleList {
    std::vector<Rule> rules;
    int default_class = -1;
    long long default_match = 0;  // residual cases carrying default_class
    long long default_total = 0;  // residual size
    int n_attributes = 0;

    Classification classify(std::span<const std::uint8_t> sample) const;
    double score(std::span<const std::uint8_t> sample) const;
    double terms_per_rule() const;
    double training_accuracy(const DiscretizedDataset& dd) const;
};

struct MinerConfig {
    int n_ants = 400;
    int max_uncovered = 10;
    int min_cases_per_rule = 5;
    int max_iterations = 100;
    int convergence_window = 10;
    HeuristicKind heuristic = HeuristicKind::Density;
    EvaporationPolicy evaporation;
    bool normalize_pheromone = false;  // Eq-10-literal update when off
    bool reinit_pheromone = true;      // fresh pheromones per covering round
    std::uint64_t seed = 0;

    void validate() const;  // throws ConfigError
};

// tau_ij(0) = 1 / (total number of terms).
PheromoneTable init_pheromone(const TermSpace& space);

// Unnormalized entropy gain log2(k) - InfoT over the remaining samples
// with attribute == value; empty partitions return 0 (ineligible).
double entropy_heuristic(const Term& term, const DiscretizedDataset& dd,
                         const std::vector<int>& remaining);

// Covered fraction |T_ij| / |Ts| of the remaining samples.
double density_heuristic(const Term& term, const DiscretizedDataset& dd,
                         const std::vector<int>& remaining);

// Batch heuristic evaluation for all terms; arith_ops (optional) counts
// the arithmetic operations spent on the heuristic formulas, the cost the
// density variant exists to cut.
std::vector<double> compute_heuristics(const DiscretizedDataset& dd,
                                       const std::vector<int>& remaining, const TermSpace& space,
                                       HeuristicKind kind, long long* arith_ops = nullptr);

// P_ij = tau*eta normalized over the eligible terms; zero elsewhere.
// Returns nullopt when no eligible term has positive weight (the ant
// stops extending).
std::optional<std::vector<double>> term_probability(const PheromoneTable& tau,
                                                    const std::vector<double>& eta,
                                                    const std::vector<bool>& eligible);

// Q = sensitivity * specificity; a factor with an empty denominator is 0.
double rule_quality(const ConfusionCounts& counts);

// One ant walk: terms sampled by term_probability, a term being eligible
// while its attribute is unused and coverage stays >= min_cases_per_rule.
// Falls back to the empty-antecedent majority rule when even the first
// term is infeasible.
Rule construct_rule(const DiscretizedDataset& dd, const std::vector<int>& remaining,
                    const PheromoneTable& tau, const std::vector<double>& heuristics,
                    const MinerConfig& cfg, Rng& rng);

// Greedy removal of the term whose removal raises Q most, re-deciding the
// majority consequent each time; stops when nothing improves or one term
// is left.
Rule prune_rule(const Rule& rule, const DiscretizedDataset& dd, const std::vector<int>& remaining);

// Evaporate everything by (1-rho), reinforce the best rule's terms by
// Q/(1+Q) of their current level; no renormalization unless asked.
PheromoneTable update_pheromone(const PheromoneTable& tau, const Rule& best,
                                const EvaporationPolicy& policy, const TermSpace& space,
                                bool normalize = false);

// Shrinks the retention factor: (1-rho) <- max(0.95*(1-rho), rho_min).
EvaporationPolicy adapt_evaporation(const EvaporationPolicy& policy);

// One covering round: init (or carry) pheromones, run n_ants per
// iteration with construct+prune, reinforce the iteration best, adapt rho
// in adaptive mode, stop on max_iterations or convergence_window
// identical iteration bests; returns the best rule across iterations.
Rule mine_one_rule(const DiscretizedDataset& dd, const std::vector<int>& remaining,
                   const MinerConfig& cfg, std::uint64_t round_seed,
                   PheromoneTable* carry = nullptr, long long* heuristic_ops = nullptr);

// Full sequential covering loop per the miner configuration.
RuleList mine(const DiscretizedDataset& dd, const MinerConfig& cfg);

// Human-readable rendering; edges/lo/hi are display-space bin boundaries
// (real feature units when the caller has destandardized them).
struct RuleDisplay {
    std::vector<std::string> names;
    std::vector<std::vector<double>> edges;
    std::vector<double> lo;
    std::vector<double> hi;
};

std::string render_rule_list(const RuleList& list, const RuleDisplay& display);

std::string rule_list_to_json(const RuleList& list);
RuleList rule_list_from_json(const std::string& text);

}  // namespace elmrules
