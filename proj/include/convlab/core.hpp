#pragma once

// Domain vocabulary: evidence, worlds, hypotheses, loss and inference
// methods. Every type here is immutable after construction.

#include "convlab/rational.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace convlab {

/// An observation is an index into the problem's alphabet.
using Token = std::uint32_t;

/// A finite data sequence e_1 ... e_n, i.e. a node of the evidence tree.
using DataSequence = std::vector<Token>;

class Alphabet {
public:
    explicit Alphabet(std::vector<std::string> symbols);

    /// Tokens 0 and 1, printed as "0" and "1".
    static Alphabet binary();

    std::size_t size() const noexcept { return symbols_.size(); }
    bool contains(Token token) const noexcept { return token < symbols_.size(); }
    const std::string& symbol(Token token) const;
    std::optional<Token> token_of(std::string_view symbol) const;
    const std::vector<std::string>& symbols() const noexcept { return symbols_; }

    /// Parses a sequence of single-character symbols ("1101").
    DataSequence parse(std::string_view text) const;

    bool operator==(const Alphabet&) const = default;

private:
    std::vector<std::string> symbols_;
};

/// An infinite data stream given by a total, deterministic generator.
/// Indices are 1-based, matching e_1 e_2 ...
class Branch {
public:
    using Generator = std::function<Token(std::size_t)>;

    Branch(std::string id, Generator generator);

    static Branch constant(Token token);
    /// Repeats `pattern` forever; "alt-10" style id derived from the pattern.
    static Branch periodic(const std::vector<Token>& pattern);
    /// All 1s except a single 0 at position `position`.
    static Branch first_zero_at(std::size_t position);

    const std::string& id() const noexcept { return id_; }
    Token at(std::size_t index) const;
    DataSequence prefix(std::size_t n) const;

private:
    std::string id_;
    std::shared_ptr<const Generator> generator_;
};

struct Classifier {
    std::string name;
    /// labels[x] is the predicted label of feature x.
    std::vector<std::uint8_t> labels;

    std::uint8_t predict(std::size_t feature) const { return labels.at(feature); }
    bool operator==(const Classifier& other) const { return labels == other.labels; }
};

class Hypothesis {
public:
    static Hypothesis label(std::string name);
    static Hypothesis real(Rational value);
    static Hypothesis classifier(Classifier c);

    bool is_label() const noexcept { return value_.index() == 0; }
    bool is_real() const noexcept { return value_.index() == 1; }
    bool is_classifier() const noexcept { return value_.index() == 2; }

    const std::string& label_name() const;
    const Rational& real_value() const;
    const Classifier& classifier_value() const;

    std::string to_string() const;
    bool operator==(const Hypothesis& other) const;

private:
    using Value = std::variant<std::string, Rational, Classifier>;
    explicit Hypothesis(Value v) : value_(std::move(v)) {}
    Value value_;
};

/// A hypothesis or the suspension of judgment ("?").
class MethodOutput {
public:
    MethodOutput(Hypothesis h) : hypothesis_(std::move(h)) {} // NOLINT(implicit)
    static MethodOutput suspend() { return MethodOutput(); }

    bool is_suspend() const noexcept { return !hypothesis_.has_value(); }
    const Hypothesis& hypothesis() const;
    std::string to_string() const;
    bool operator==(const MethodOutput&) const = default;

private:
    MethodOutput() = default;
    std::optional<Hypothesis> hypothesis_;
};

enum class MeasureKind { IidBernoulli, IidExampleSpace, PointMass, Custom };

std::string to_string(MeasureKind kind);

/// A probability measure over the evidence tree, restricted to the kinds the
/// catalog needs: IID draws from a finite alphabet, a point mass on one
/// branch, or a caller-supplied tree measure.
class Measure {
public:
    using PrefixFn = std::function<Rational(std::span<const Token>)>;
    using SamplerFn = std::function<Branch(std::uint64_t key, const std::string& id)>;

    /// IID tosses; `theta` is the probability of token 1.
    static Measure iid_bernoulli(Rational theta);
    /// IID draws over a finite example space; probabilities indexed by token.
    static Measure iid(std::vector<Rational> token_probs);
    static Measure point_mass(Branch branch, std::size_t alphabet_size = 2);
    static Measure custom(std::size_t alphabet_size, PrefixFn prefix_prob, SamplerFn sampler,
                          bool countably_additive = true);

    MeasureKind kind() const noexcept { return kind_; }
    bool is_iid() const noexcept;
    bool countably_additive() const noexcept { return countably_additive_; }
    std::size_t alphabet_size() const noexcept { return alphabet_size_; }

    /// Per-token probabilities of an IID measure.
    const std::vector<Rational>& token_probs() const;
    /// Probability of token 1 for IID-Bernoulli.
    const Rational& theta() const;
    const Branch& mass_point() const;

    Rational prefix_prob(std::span<const Token> prefix) const;

    /// A branch distributed according to the measure, lazily realized from
    /// the stream `key`.
    Branch sample(std::uint64_t key, const std::string& id) const;
    /// The first n tokens of sample(key, ...), without building a Branch.
    void sample_prefix(std::uint64_t key, std::size_t n, DataSequence& out) const;

private:
    struct IidTables {
        std::vector<Rational> probs;
        /// floor(2^64 * cumulative probability) per token.
        std::vector<std::uint64_t> thresholds;
        /// Cumulative probability reaches exactly 1 at this token.
        std::vector<bool> certain;
    };

    Measure() = default;
    Token draw_iid(std::uint64_t key, std::size_t index) const;

    MeasureKind kind_ = MeasureKind::Custom;
    std::size_t alphabet_size_ = 0;
    bool countably_additive_ = true;
    std::shared_ptr<const IidTables> iid_;
    std::optional<Branch> mass_point_;
    PrefixFn prefix_fn_;
    SamplerFn sampler_fn_;
};

/// Truth-determining extras carried by a world besides its branch.
struct WorldExtras {
    std::optional<Rational> theta;
    std::optional<std::size_t> distribution;
    std::string note;
};

struct World {
    std::string id;
    Branch branch;
    Hypothesis truth;
    std::optional<Measure> measure;
    WorldExtras extras;
    /// Truth of the world obtained by keeping the extras and measure but
    /// replacing the branch. Unset means the truth does not depend on the
    /// branch.
    std::function<Hypothesis(const Branch&)> truth_for_branch;

    Hypothesis truth_on(const Branch& other) const;
    /// Same world with another branch, truth recomputed.
    World rebranched(Branch other, std::string new_id) const;
};

/// Loss of accuracy; +infinity is reserved for suspension.
class LossValue {
public:
    explicit LossValue(Rational value);
    static LossValue infinite();

    bool is_infinite() const noexcept { return infinite_; }
    bool is_zero() const noexcept { return !infinite_ && value_ == 0; }
    /// Strictly below `bound`; never true for +infinity.
    bool below(const Rational& bound) const { return !infinite_ && value_ < bound; }
    const Rational& value() const;
    double to_double() const;
    std::string to_string() const;

private:
    LossValue() = default;
    Rational value_;
    bool infinite_ = false;
};

using LossFunction = std::function<Rational(const Hypothesis&, const World&)>;

class HypothesisSpace {
public:
    enum class Kind { Labels, RealInterval, Classifiers };

    static HypothesisSpace labels(std::vector<std::string> names);
    static HypothesisSpace interval(Rational lo, Rational hi);
    static HypothesisSpace classifiers(std::vector<Classifier> members, std::size_t feature_count);

    Kind kind() const noexcept { return kind_; }
    bool contains(const Hypothesis& h) const;
    /// Members of a finite space in declaration order; throws TypeError for
    /// an interval.
    std::vector<Hypothesis> enumerate() const;
    const std::vector<Classifier>& classifier_members() const { return classifiers_; }
    std::string describe() const;

private:
    Kind kind_ = Kind::Labels;
    std::vector<std::string> labels_;
    Rational lo_ = 0;
    Rational hi_ = 1;
    std::vector<Classifier> classifiers_;
    std::size_t feature_count_ = 0;
};

struct WorldFamily {
    std::vector<World> members;
    /// Human-readable description of the grid the members were built from.
    std::string grid;
};

struct EmpiricalProblem {
    std::string name;
    HypothesisSpace hypotheses;
    Alphabet alphabet;
    WorldFamily worlds;
    LossFunction loss;
    /// Hypotheses tried against each world when spot-checking uniqueness of
    /// the zero-loss hypothesis.
    std::vector<Hypothesis> probes;

    const World& world(std::string_view id) const;
};

/// A deterministic map from finite data sequences to outputs.
class InferenceMethod {
public:
    using Rule = std::function<MethodOutput(std::span<const Token>)>;

    InferenceMethod(std::string name, std::size_t alphabet_size, bool count_symmetric, Rule rule);

    const std::string& name() const noexcept { return name_; }
    std::size_t alphabet_size() const noexcept { return alphabet_size_; }
    /// For binary alphabets: output depends only on (n, number of 1s).
    bool count_symmetric() const noexcept { return count_symmetric_; }

    /// Applies the rule without validating tokens.
    MethodOutput decide(std::span<const Token> seq) const { return (*rule_)(seq); }

private:
    std::string name_;
    std::size_t alphabet_size_;
    bool count_symmetric_;
    std::shared_ptr<const Rule> rule_;
};

MethodOutput apply_method(const InferenceMethod& method, std::span<const Token> seq);

/// h^{M,n,w}: the output on the first n observations of w's branch.
MethodOutput output_at(const InferenceMethod& method, const World& world, std::size_t n);

LossValue loss_of(const EmpiricalProblem& problem, const MethodOutput& out, const World& world);

struct WorldValidation {
    std::string world_id;
    bool truth_attains_zero = false;
    bool truth_in_space = false;
    /// A probe other than the truth that also attains zero loss.
    std::optional<std::string> rival;
    bool alphabet_ok = false;
    /// Branch prefix has positive probability under the world's measure (or
    /// equals the mass point); true when there is no measure.
    bool measure_consistent = false;

    bool ok() const {
        return truth_attains_zero && truth_in_space && !rival && alphabet_ok && measure_consistent;
    }
};

struct ValidationReport {
    std::vector<WorldValidation> worlds;
    bool nonempty_family = false;

    bool ok() const;
    std::vector<std::string> violations() const;
};

ValidationReport validate_problem(const EmpiricalProblem& problem, std::span<const World> witness_worlds,
                                  std::size_t prefix_length = 64);

} // namespace convlab
