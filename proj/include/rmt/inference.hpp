#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "rmt/ontology.hpp"
#include "rmt/rational.hpp"
#include "rmt/rule_lang.hpp"

namespace rmt::infer {

enum class TransformKind { add, remove, replace };
enum class Position { on, front, behind };
enum class ReplaceKind { weather, time, object };
enum class Behavior { speed, steering };

std::string to_string(TransformKind k);
std::string to_string(Position p);
std::string to_string(ReplaceKind k);
std::string to_string(Behavior b);

struct TransformationProposition {
    TransformKind kind = TransformKind::add;
    onto::MatchedEntity target;
    std::optional<onto::MatchedEntity> reference;
    std::optional<Position> position;     // add only
    std::optional<ReplaceKind> replace_kind; // replace only
    std::optional<std::string> comparative;  // second block only, e.g. "closer"
};

enum class ChangeKind { increase, decrease, same };
enum class Modifier { none, at_least, more_than, less_than };
enum class Unit { absolute, percent };

struct Quantity {
    Rational value;
    Unit unit = Unit::absolute;
    bool operator==(const Quantity&) const = default;
};

struct ChangePropositions {
    ChangeKind change = ChangeKind::decrease;
    Modifier modifier = Modifier::none;
    std::optional<Quantity> quantity;
    bool negated = false;
    bool comparative_more = false;
    Behavior behavior = Behavior::speed;
};

/// Conjunct sides are expressed over the block's prediction pair (a, b):
/// block 1 binds (x1, x2), block 2 binds (x2, x3).
enum class Lhs { diff_ab, diff_ba, rel_ab, rel_ba, abs_diff };
enum class CmpOp { gt, lt, ge, le };

std::string to_string(CmpOp op);
std::string lhs_string(Lhs lhs, int block_order);

struct Conjunct {
    Lhs lhs = Lhs::diff_ab;
    CmpOp op = CmpOp::gt;
    Rational rhs;
    bool operator==(const Conjunct&) const = default;
};

struct ExpectedChangeFormula {
    std::vector<Conjunct> conjuncts; // conjunction, 1 or 2 entries
    Behavior behavior = Behavior::speed;
    bool operator==(const ExpectedChangeFormula&) const = default;
};

struct MrBlock {
    TransformationProposition proposition;
    ExpectedChangeFormula formula;
};

struct MetamorphicRelation {
    std::vector<MrBlock> blocks; // 1 or 2
    std::string rule_text;

    bool chained() const { return blocks.size() > 1; }
};

/// Per-behavior tolerance for "keep the same" formulas.
struct DeltaThresholds {
    Rational speed{0};
    Rational steering{139, 100}; // 1.39 degrees
    const Rational& for_behavior(Behavior b) const {
        return b == Behavior::speed ? speed : steering;
    }
};

struct FormulaEval {
    bool pass = false;
    bool degenerate = false;             // relative lhs with a zero denominator
    std::optional<std::size_t> failed_conjunct;
};

TransformationProposition infer_transformation(const std::vector<lang::Token>& clause,
                                               const std::vector<lang::DependencyPredicate>& deps,
                                               const onto::Ontology& ontology, double wup_threshold,
                                               std::vector<std::string>* warnings = nullptr);

ChangePropositions infer_expected_change(const std::vector<lang::Token>& clause,
                                         const onto::Ontology& ontology);

ExpectedChangeFormula build_formula(const ChangePropositions& props,
                                    const DeltaThresholds& defaults);

onto::MatchedEntity resolve_pronoun(const lang::Token& pron,
                                    const std::vector<onto::MatchedEntity>& prior_entities);

MetamorphicRelation build_mr(std::vector<MrBlock> blocks, std::string rule_text);

FormulaEval evaluate_formula(const ExpectedChangeFormula& formula, double a, double b);

struct ParseOptions {
    double wup_threshold = 0.75;
    DeltaThresholds deltas;
};

struct ParseResult {
    MetamorphicRelation mr;
    std::vector<std::string> warnings;
};

/// Full pipeline: split blocks, tag, extract dependencies, match the
/// ontology, infer propositions and formulas, assemble the MR.
ParseResult parse_rule(const std::string& rule_text, const onto::Ontology& ontology,
                       const ParseOptions& options);

/// Canonical single-line JSON with fixed key order; non-integer rationals
/// print as decimal strings.
nlohmann::ordered_json proposition_to_json(const TransformationProposition& prop);
nlohmann::ordered_json mr_to_json(const MetamorphicRelation& mr);

std::string dump_dependencies_jsonl(const std::vector<lang::DependencyPredicate>& deps);

} // namespace rmt::infer
