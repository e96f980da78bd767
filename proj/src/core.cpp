#include "convlab/core.hpp"

#include "convlab/errors.hpp"
#include "convlab/rng.hpp"

#include <limits>
#include <sstream>

namespace convlab {

// ---------------------------------------------------------------- Alphabet

Alphabet::Alphabet(std::vector<std::string> symbols) : symbols_(std::move(symbols)) {
    if (symbols_.empty()) throw ConfigError("alphabet must be nonempty");
}

Alphabet Alphabet::binary() { return Alphabet({"0", "1"}); }

const std::string& Alphabet::symbol(Token token) const {
    if (!contains(token)) throw DomainError("token " + std::to_string(token) + " outside alphabet");
    return symbols_[token];
}

std::optional<Token> Alphabet::token_of(std::string_view symbol) const {
    for (std::size_t i = 0; i < symbols_.size(); ++i) {
        if (symbols_[i] == symbol) return static_cast<Token>(i);
    }
    return std::nullopt;
}

DataSequence Alphabet::parse(std::string_view text) const {
    DataSequence seq;
    seq.reserve(text.size());
    for (char c : text) {
        auto token = token_of(std::string_view(&c, 1));
        if (!token) throw DomainError(std::string("symbol '") + c + "' outside alphabet");
        seq.push_back(*token);
    }
    return seq;
}

// ------------------------------------------------------------------ Branch

Branch::Branch(std::string id, Generator generator)
    : id_(std::move(id)), generator_(std::make_shared<const Generator>(std::move(generator))) {
    if (!*generator_) throw ConfigError("branch '" + id_ + "' has no generator");
}

Branch Branch::constant(Token token) {
    return Branch("const-" + std::to_string(token), [token](std::size_t) { return token; });
}

Branch Branch::periodic(const std::vector<Token>& pattern) {
    if (pattern.empty()) throw ConfigError("periodic branch needs a nonempty pattern");
    std::string id = "periodic-";
    for (Token t : pattern) id += std::to_string(t);
    return Branch(std::move(id), [pattern](std::size_t i) { return pattern[(i - 1) % pattern.size()]; });
}

Branch Branch::first_zero_at(std::size_t position) {
    if (position == 0) throw ConfigError("first-zero position is 1-based");
    return Branch("first0@" + std::to_string(position),
                  [position](std::size_t i) { return i == position ? Token{0} : Token{1}; });
}

Token Branch::at(std::size_t index) const {
    if (index == 0) throw DomainError("branch indices start at 1");
    return (*generator_)(index);
}

DataSequence Branch::prefix(std::size_t n) const {
    DataSequence seq(n);
    for (std::size_t i = 0; i < n; ++i) seq[i] = (*generator_)(i + 1);
    return seq;
}

// -------------------------------------------------------------- Hypothesis

Hypothesis Hypothesis::label(std::string name) { return Hypothesis(Value(std::in_place_index<0>, std::move(name))); }

Hypothesis Hypothesis::real(Rational value) { return Hypothesis(Value(std::in_place_index<1>, std::move(value))); }

Hypothesis Hypothesis::classifier(Classifier c) { return Hypothesis(Value(std::in_place_index<2>, std::move(c))); }

const std::string& Hypothesis::label_name() const {
    if (!is_label()) throw TypeError("hypothesis is not a label");
    return std::get<0>(value_);
}

const Rational& Hypothesis::real_value() const {
    if (!is_real()) throw TypeError("hypothesis is not a real value");
    return std::get<1>(value_);
}

const Classifier& Hypothesis::classifier_value() const {
    if (!is_classifier()) throw TypeError("hypothesis is not a classifier");
    return std::get<2>(value_);
}

std::string Hypothesis::to_string() const {
    if (is_label()) return label_name();
    if (is_real()) return format_rational(real_value());
    const auto& c = classifier_value();
    if (!c.name.empty()) return c.name;
    std::string s = "classifier[";
    for (auto l : c.labels) s += static_cast<char>('0' + l);
    return s + "]";
}

bool Hypothesis::operator==(const Hypothesis& other) const { return value_ == other.value_; }

const Hypothesis& MethodOutput::hypothesis() const {
    if (!hypothesis_) throw PreconditionError("suspended output carries no hypothesis");
    return *hypothesis_;
}

std::string MethodOutput::to_string() const { return hypothesis_ ? hypothesis_->to_string() : "?"; }

// ----------------------------------------------------------------- Measure

std::string to_string(MeasureKind kind) {
    switch (kind) {
    case MeasureKind::IidBernoulli: return "iid-bernoulli";
    case MeasureKind::IidExampleSpace: return "iid-example-space";
    case MeasureKind::PointMass: return "point-mass";
    case MeasureKind::Custom: return "custom";
    }
    return "unknown";
}

Measure Measure::iid(std::vector<Rational> token_probs) {
    if (token_probs.empty()) throw ConfigError("IID measure needs at least one token");
    Rational total = 0;
    for (const auto& p : token_probs) {
        if (p < 0 || p > 1) throw DomainError("token probability outside [0,1]: " + format_rational(p));
        total += p;
    }
    if (total != 1) throw DomainError("token probabilities sum to " + format_rational(total) + ", not 1");

    auto tables = std::make_shared<IidTables>();
    Rational cumulative = 0;
    for (const auto& p : token_probs) {
        cumulative += p;
        tables->thresholds.push_back(scaled_threshold(cumulative));
        tables->certain.push_back(cumulative == 1);
    }
    tables->probs = std::move(token_probs);

    Measure m;
    m.kind_ = MeasureKind::IidExampleSpace;
    m.alphabet_size_ = tables->probs.size();
    m.iid_ = std::move(tables);
    return m;
}

Measure Measure::iid_bernoulli(Rational theta) {
    if (theta < 0 || theta > 1) throw DomainError("Bernoulli parameter outside [0,1]: " + format_rational(theta));
    Measure m = iid({Rational(1 - theta), theta});
    m.kind_ = MeasureKind::IidBernoulli;
    return m;
}

Measure Measure::point_mass(Branch branch, std::size_t alphabet_size) {
    Measure m;
    m.kind_ = MeasureKind::PointMass;
    m.alphabet_size_ = alphabet_size;
    m.mass_point_ = std::move(branch);
    return m;
}

Measure Measure::custom(std::size_t alphabet_size, PrefixFn prefix_prob, SamplerFn sampler, bool countably_additive) {
    if (!prefix_prob || !sampler) throw ConfigError("custom measure needs prefix and sampler functions");
    Measure m;
    m.kind_ = MeasureKind::Custom;
    m.alphabet_size_ = alphabet_size;
    m.countably_additive_ = countably_additive;
    m.prefix_fn_ = std::move(prefix_prob);
    m.sampler_fn_ = std::move(sampler);
    return m;
}

bool Measure::is_iid() const noexcept {
    return kind_ == MeasureKind::IidBernoulli || kind_ == MeasureKind::IidExampleSpace;
}

const std::vector<Rational>& Measure::token_probs() const {
    if (!is_iid()) throw PreconditionError("measure is not IID");
    return iid_->probs;
}

const Rational& Measure::theta() const {
    if (kind_ != MeasureKind::IidBernoulli) throw PreconditionError("measure is not IID-Bernoulli");
    return iid_->probs[1];
}

const Branch& Measure::mass_point() const {
    if (kind_ != MeasureKind::PointMass) throw PreconditionError("measure is not a point mass");
    return *mass_point_;
}

Rational Measure::prefix_prob(std::span<const Token> prefix) const {
    switch (kind_) {
    case MeasureKind::IidBernoulli:
    case MeasureKind::IidExampleSpace: {
        Rational p = 1;
        for (Token t : prefix) {
            if (t >= iid_->probs.size()) return 0;
            p *= iid_->probs[t];
            if (p == 0) return 0;
        }
        return p;
    }
    case MeasureKind::PointMass:
        for (std::size_t i = 0; i < prefix.size(); ++i) {
            if (mass_point_->at(i + 1) != prefix[i]) return 0;
        }
        return 1;
    case MeasureKind::Custom:
        return prefix_fn_(prefix);
    }
    return 0;
}

Token Measure::draw_iid(std::uint64_t key, std::size_t index) const {
    const std::uint64_t u = rng::draw(key, index);
    const auto& thresholds = iid_->thresholds;
    for (std::size_t t = 0; t + 1 < thresholds.size(); ++t) {
        if (iid_->certain[t] || u < thresholds[t]) return static_cast<Token>(t);
    }
    return static_cast<Token>(thresholds.size() - 1);
}

Branch Measure::sample(std::uint64_t key, const std::string& id) const {
    switch (kind_) {
    case MeasureKind::IidBernoulli:
    case MeasureKind::IidExampleSpace: {
        return Branch(id, [self = *this, key](std::size_t i) { return self.draw_iid(key, i); });
    }
    case MeasureKind::PointMass:
        return *mass_point_;
    case MeasureKind::Custom:
        return sampler_fn_(key, id);
    }
    throw PreconditionError("unknown measure kind");
}

void Measure::sample_prefix(std::uint64_t key, std::size_t n, DataSequence& out) const {
    out.resize(n);
    if (is_iid()) {
        for (std::size_t i = 0; i < n; ++i) out[i] = draw_iid(key, i + 1);
        return;
    }
    const Branch b = sample(key, "sample");
    for (std::size_t i = 0; i < n; ++i) out[i] = b.at(i + 1);
}

// ------------------------------------------------------------------- World

Hypothesis World::truth_on(const Branch& other) const { return truth_for_branch ? truth_for_branch(other) : truth; }

World World::rebranched(Branch other, std::string new_id) const {
    World w = *this;
    w.truth = truth_on(other);
    w.branch = std::move(other);
    w.id = std::move(new_id);
    return w;
}

// --------------------------------------------------------------- LossValue

LossValue::LossValue(Rational value) : value_(std::move(value)) {
    if (value_ < 0) throw DomainError("loss must be nonnegative, got " + format_rational(value_));
}

LossValue LossValue::infinite() {
    LossValue v;
    v.infinite_ = true;
    return v;
}

const Rational& LossValue::value() const {
    if (infinite_) throw PreconditionError("infinite loss has no finite value");
    return value_;
}

double LossValue::to_double() const {
    return infinite_ ? std::numeric_limits<double>::infinity() : convlab::to_double(value_);
}

std::string LossValue::to_string() const { return infinite_ ? "inf" : format_rational(value_); }

// --------------------------------------------------------- HypothesisSpace

HypothesisSpace HypothesisSpace::labels(std::vector<std::string> names) {
    if (names.empty()) throw ConfigError("hypothesis space must be nonempty");
    HypothesisSpace s;
    s.kind_ = Kind::Labels;
    s.labels_ = std::move(names);
    return s;
}

HypothesisSpace HypothesisSpace::interval(Rational lo, Rational hi) {
    if (lo > hi) throw ConfigError("empty hypothesis interval");
    HypothesisSpace s;
    s.kind_ = Kind::RealInterval;
    s.lo_ = std::move(lo);
    s.hi_ = std::move(hi);
    return s;
}

HypothesisSpace HypothesisSpace::classifiers(std::vector<Classifier> members, std::size_t feature_count) {
    if (members.empty()) throw ConfigError("classifier set must be nonempty");
    for (const auto& c : members) {
        if (c.labels.size() != feature_count) throw ConfigError("classifier '" + c.name + "' is not total on X");
        for (auto l : c.labels) {
            if (l > 1) throw ConfigError("classifier '" + c.name + "' predicts a non-binary label");
        }
    }
    HypothesisSpace s;
    s.kind_ = Kind::Classifiers;
    s.classifiers_ = std::move(members);
    s.feature_count_ = feature_count;
    return s;
}

bool HypothesisSpace::contains(const Hypothesis& h) const {
    switch (kind_) {
    case Kind::Labels:
        return h.is_label() && std::find(labels_.begin(), labels_.end(), h.label_name()) != labels_.end();
    case Kind::RealInterval:
        return h.is_real() && h.real_value() >= lo_ && h.real_value() <= hi_;
    case Kind::Classifiers:
        return h.is_classifier() &&
               std::find(classifiers_.begin(), classifiers_.end(), h.classifier_value()) != classifiers_.end();
    }
    return false;
}

std::vector<Hypothesis> HypothesisSpace::enumerate() const {
    std::vector<Hypothesis> out;
    switch (kind_) {
    case Kind::Labels:
        for (const auto& l : labels_) out.push_back(Hypothesis::label(l));
        break;
    case Kind::Classifiers:
        for (const auto& c : classifiers_) out.push_back(Hypothesis::classifier(c));
        break;
    case Kind::RealInterval:
        throw TypeError("a real interval cannot be enumerated");
    }
    return out;
}

std::string HypothesisSpace::describe() const {
    std::ostringstream os;
    switch (kind_) {
    case Kind::Labels:
        os << "{";
        for (std::size_t i = 0; i < labels_.size(); ++i) os << (i ? ", " : "") << labels_[i];
        os << "}";
        break;
    case Kind::RealInterval:
        os << "[" << format_rational(lo_) << ", " << format_rational(hi_) << "]";
        break;
    case Kind::Classifiers:
        os << classifiers_.size() << " classifiers over " << feature_count_ << " features";
        break;
    }
    return os.str();
}

const World& EmpiricalProblem::world(std::string_view id) const {
    for (const auto& w : worlds.members) {
        if (w.id == id) return w;
    }
    throw ConfigError("problem '" + name + "' has no world '" + std::string(id) + "'");
}

// --------------------------------------------------------- InferenceMethod

InferenceMethod::InferenceMethod(std::string name, std::size_t alphabet_size, bool count_symmetric, Rule rule)
    : name_(std::move(name)),
      alphabet_size_(alphabet_size),
      count_symmetric_(count_symmetric),
      rule_(std::make_shared<const Rule>(std::move(rule))) {
    if (!*rule_) throw ConfigError("method '" + name_ + "' has no rule");
    if (count_symmetric_ && alphabet_size_ != 2) {
        throw ConfigError("count symmetry is only defined for binary alphabets");
    }
}

MethodOutput apply_method(const InferenceMethod& method, std::span<const Token> seq) {
    for (std::size_t i = 0; i < seq.size(); ++i) {
        if (seq[i] >= method.alphabet_size()) {
            throw DomainError("method '" + method.name() + "': token " + std::to_string(seq[i]) + " at position " +
                              std::to_string(i + 1) + " outside its alphabet");
        }
    }
    return method.decide(seq);
}

MethodOutput output_at(const InferenceMethod& method, const World& world, std::size_t n) {
    const DataSequence prefix = world.branch.prefix(n);
    return apply_method(method, prefix);
}

LossValue loss_of(const EmpiricalProblem& problem, const MethodOutput& out, const World& world) {
    if (out.is_suspend()) return LossValue::infinite();
    if (!problem.hypotheses.contains(out.hypothesis())) {
        throw DomainError("hypothesis " + out.hypothesis().to_string() + " outside H of '" + problem.name + "'");
    }
    return LossValue(problem.loss(out.hypothesis(), world));
}

// -------------------------------------------------------------- validation

bool ValidationReport::ok() const {
    if (!nonempty_family) return false;
    return std::all_of(worlds.begin(), worlds.end(), [](const auto& w) { return w.ok(); });
}

std::vector<std::string> ValidationReport::violations() const {
    std::vector<std::string> out;
    if (!nonempty_family) out.emplace_back("world family is empty");
    for (const auto& w : worlds) {
        if (!w.truth_in_space) out.push_back(w.world_id + ": truth outside H");
        if (!w.truth_attains_zero) out.push_back(w.world_id + ": truth does not attain zero loss");
        if (w.rival) out.push_back(w.world_id + ": uniqueness violated by " + *w.rival);
        if (!w.alphabet_ok) out.push_back(w.world_id + ": branch emits a token outside the alphabet");
        if (!w.measure_consistent) out.push_back(w.world_id + ": branch inconsistent with its measure");
    }
    return out;
}

ValidationReport validate_problem(const EmpiricalProblem& problem, std::span<const World> witness_worlds,
                                  std::size_t prefix_length) {
    ValidationReport report;
    report.nonempty_family = !problem.worlds.members.empty();

    for (const auto& world : witness_worlds) {
        WorldValidation v;
        v.world_id = world.id;
        v.truth_in_space = problem.hypotheses.contains(world.truth);
        v.truth_attains_zero = problem.loss(world.truth, world) == 0;
        for (const auto& probe : problem.probes) {
            if (probe == world.truth) continue;
            if (problem.loss(probe, world) == 0) {
                v.rival = probe.to_string();
                break;
            }
        }

        const DataSequence prefix = world.branch.prefix(prefix_length);
        v.alphabet_ok = std::all_of(prefix.begin(), prefix.end(),
                                    [&](Token t) { return problem.alphabet.contains(t); });
        v.measure_consistent = !world.measure || world.measure->prefix_prob(prefix) > 0;
        report.worlds.push_back(std::move(v));
    }
    return report;
}

} // namespace convlab
