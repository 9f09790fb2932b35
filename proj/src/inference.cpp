#include "rmt/inference.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace rmt::infer {

using lang::Pos;
using lang::Token;

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

const Token* find_root_verb(const std::vector<Token>& clause) {
    for (const Token& t : clause) {
        if (t.pos == Pos::Verb) return &t;
    }
    return nullptr;
}

const lang::DependencyPredicate* find_relation(const std::vector<lang::DependencyPredicate>& deps,
                                               const std::string& relation) {
    for (const auto& d : deps) {
        if (d.relation == relation) return &d;
    }
    return nullptr;
}

bool is_negation(const Token& t) {
    static const std::set<std::string> words = {"no", "not", "never", "n't"};
    return words.count(lower(t.text)) > 0;
}

bool subcategory_is(const onto::Ontology& ontology, const onto::MatchedEntity& entity,
                    const std::string& path_head) {
    const onto::OntologyElement* element = ontology.find(entity.element);
    return element && element->subcategory.rfind(path_head, 0) == 0;
}

} // namespace

std::string to_string(TransformKind k) {
    switch (k) {
        case TransformKind::add: return "add";
        case TransformKind::remove: return "remove";
        case TransformKind::replace: return "replace";
    }
    return "add";
}

std::string to_string(Position p) {
    switch (p) {
        case Position::on: return "on";
        case Position::front: return "front";
        case Position::behind: return "behind";
    }
    return "on";
}

std::string to_string(ReplaceKind k) {
    switch (k) {
        case ReplaceKind::weather: return "weather";
        case ReplaceKind::time: return "time";
        case ReplaceKind::object: return "object";
    }
    return "object";
}

std::string to_string(Behavior b) { return b == Behavior::speed ? "speed" : "steering"; }

std::string to_string(CmpOp op) {
    switch (op) {
        case CmpOp::gt: return ">";
        case CmpOp::lt: return "<";
        case CmpOp::ge: return ">=";
        case CmpOp::le: return "<=";
    }
    return ">";
}

std::string lhs_string(Lhs lhs, int block_order) {
    const std::string a = "x" + std::to_string(block_order);
    const std::string b = "x" + std::to_string(block_order + 1);
    switch (lhs) {
        case Lhs::diff_ab: return a + "-" + b;
        case Lhs::diff_ba: return b + "-" + a;
        case Lhs::rel_ab: return "(" + a + "-" + b + ")/" + a;
        case Lhs::rel_ba: return "(" + b + "-" + a + ")/" + a;
        case Lhs::abs_diff: return "|" + a + "-" + b + "|";
    }
    return a + "-" + b;
}

TransformationProposition infer_transformation(const std::vector<Token>& clause,
                                               const std::vector<lang::DependencyPredicate>& deps,
                                               const onto::Ontology& ontology, double wup_threshold,
                                               std::vector<std::string>* warnings) {
    const Token* root = find_root_verb(clause);
    if (!root) raise("NoRootVerb", "tag", "if-clause has no verb");

    const auto verb_match =
        onto::match_association(*root, ontology.lexicon, onto::AssociationDomain::transformation);
    if (!verb_match)
        raise("NoTransformationMatched", "inference",
              "verb '" + root->text + "' matches no transformation");

    const auto* nsubj = find_relation(deps, "NSUBJ");
    if (!nsubj)
        raise("NoOntologyMatch", "inference", "if-clause has no subject to match");
    auto subject = onto::match_element(nsubj->dependent, ontology, wup_threshold);
    if (!subject)
        raise("NoOntologyMatch", "inference",
              "noun '" + nsubj->dependent.text + "' matches no ontology element");
    *subject = onto::match_properties(*subject, deps, ontology, wup_threshold, warnings);

    TransformationProposition prop;
    prop.target = *subject;

    const std::string& kind = verb_match->first;
    if (kind == "add") {
        prop.kind = TransformKind::add;
        static const std::pair<const char*, Position> positions[] = {
            {"ON", Position::on}, {"FRONT", Position::front}, {"BEHIND", Position::behind}};
        for (const auto& [rel, pos] : positions) {
            if (const auto* dep = find_relation(deps, rel)) {
                auto ref = onto::match_element(dep->dependent, ontology, wup_threshold);
                if (ref) {
                    prop.reference = onto::match_properties(*ref, deps, ontology, wup_threshold,
                                                            warnings);
                    prop.position = pos;
                    break;
                }
            }
        }
        if (!prop.reference)
            raise("MissingReference", "inference",
                  "add transformation needs a positional reference (on/in front of/behind)");
    } else if (kind == "remove") {
        prop.kind = TransformKind::remove;
    } else {
        prop.kind = TransformKind::replace;
        // The replacement comes from any prepositional predicate (WITH, INTO, TO, ...).
        for (const auto& dep : deps) {
            static const std::set<std::string> structural = {"NSUBJ", "DOBJ",    "AMOD",
                                                             "ADVMOD", "NPADVMOD", "DET"};
            if (structural.count(dep.relation)) continue;
            if (dep.dependent.pos != Pos::Noun) continue;
            auto ref = onto::match_element(dep.dependent, ontology, wup_threshold);
            if (ref) {
                prop.reference = onto::match_properties(*ref, deps, ontology, wup_threshold,
                                                        warnings);
                break;
            }
        }
        if (!prop.reference)
            raise("MissingReference", "inference",
                  "replace transformation needs a replacement entity");

        const bool both_weather = subcategory_is(ontology, prop.target, "Weather") &&
                                  subcategory_is(ontology, *prop.reference, "Weather");
        const bool both_time = subcategory_is(ontology, prop.target, "Time") &&
                               subcategory_is(ontology, *prop.reference, "Time");
        if (both_weather) {
            prop.replace_kind = ReplaceKind::weather;
        } else if (both_time) {
            prop.replace_kind = ReplaceKind::time;
        } else {
            const onto::OntologyElement* t = ontology.find(prop.target.element);
            const onto::OntologyElement* r = ontology.find(prop.reference->element);
            const auto is_objectish = [](const onto::OntologyElement* e) {
                return e && (e->category == onto::Category::Object ||
                             e->category == onto::Category::RoadNetwork);
            };
            if (!is_objectish(t) || !is_objectish(r))
                raise("MissingReference", "inference",
                      "replace entities must both be objects or both environment values");
            prop.replace_kind = ReplaceKind::object;
        }

        // "changes into night": bind the complementary value on the target so
        // a day->night replacement knows its source domain.
        if ((both_weather || both_time) && prop.target.element == prop.reference->element) {
            for (const auto& [p, v] : prop.reference->bound_properties) {
                if (prop.target.bound_properties.count(p)) continue;
                const onto::OntologyElement* element = ontology.find(prop.target.element);
                if (!element) continue;
                const auto it = element->properties.find(p);
                if (it == element->properties.end()) continue;
                for (const auto& candidate : it->second) {
                    if (candidate != v) {
                        prop.target.bound_properties[p] = candidate;
                        break;
                    }
                }
            }
        }
    }
    return prop;
}

ChangePropositions infer_expected_change(const std::vector<Token>& clause,
                                         const onto::Ontology& ontology) {
    ChangePropositions props;

    // The change comes from the verb when there is one; nouns and adjectives
    // ("a 10% decrease", "the same") are the fallback.
    bool change_found = false;
    for (const Pos wanted : {Pos::Verb, Pos::Noun, Pos::Adj}) {
        for (const Token& t : clause) {
            if (t.pos != wanted) continue;
            const auto m = ontology.lexicon.best(t.lemma, onto::AssociationDomain::change);
            if (m) {
                props.change = m->first == "increase"   ? ChangeKind::increase
                               : m->first == "decrease" ? ChangeKind::decrease
                                                        : ChangeKind::same;
                change_found = true;
                break;
            }
        }
        if (change_found) break;
    }
    if (!change_found)
        raise("NoChangeMatched", "inference",
              "then-clause has no recognizable expected change: '" + lang::render_tokens(clause) +
                  "'");

    // Modifier phrases; consumed token indices are excluded from the
    // comparative scan below.
    std::set<int> consumed;
    for (std::size_t i = 0; i + 1 < clause.size(); ++i) {
        const std::string w0 = lower(clause[i].text);
        const std::string w1 = lower(clause[i + 1].text);
        if (w0 == "at" && w1 == "least") {
            props.modifier = Modifier::at_least;
            consumed.insert(clause[i].index);
            consumed.insert(clause[i + 1].index);
        } else if (w0 == "more" && w1 == "than") {
            props.modifier = Modifier::more_than;
            consumed.insert(clause[i].index);
            consumed.insert(clause[i + 1].index);
        } else if (w0 == "less" && w1 == "than") {
            props.modifier = Modifier::less_than;
            consumed.insert(clause[i].index);
            consumed.insert(clause[i + 1].index);
        }
    }

    // Quantity from the first numeral; percent wins over plain numbers.
    for (const Token& t : clause) {
        if (t.pos == Pos::Percent) {
            props.quantity = Quantity{Rational::from_decimal_string(t.text.substr(0, t.text.size() - 1)),
                                      Unit::percent};
            break;
        }
        if (t.pos == Pos::Num) {
            std::string digits = t.text;
            if (const auto space = digits.find(' '); space != std::string::npos)
                digits = digits.substr(0, space); // strip a merged unit suffix
            props.quantity = Quantity{Rational::from_decimal_string(digits), Unit::absolute};
            break;
        }
    }

    for (const Token& t : clause) {
        if (is_negation(t)) props.negated = true;
    }

    // Behavior defaults to speed; steering wins when the clause mentions it.
    static const std::set<std::string> steering_words = {"steering", "angle", "steer", "deviate",
                                                         "turn", "steering angle"};
    for (const Token& t : clause) {
        if (steering_words.count(t.lemma) || steering_words.count(lower(t.text))) {
            props.behavior = Behavior::steering;
            break;
        }
    }

    // A bare comparative "more" (not part of "more than") modifies the verb.
    for (const Token& t : clause) {
        if (t.comparative && lower(t.text) == "more" && !consumed.count(t.index)) {
            props.comparative_more = true;
        }
    }

    if (props.change == ChangeKind::same) {
        props.modifier = Modifier::none;
        props.quantity.reset();
    }
    if (props.quantity && props.modifier == Modifier::none) {
        // "decrease 10 km/h" means at least 10.
        props.modifier = Modifier::at_least;
    }
    if (!props.quantity) {
        props.modifier = Modifier::none;
    }
    return props;
}

ExpectedChangeFormula build_formula(const ChangePropositions& props,
                                    const DeltaThresholds& defaults) {
    ExpectedChangeFormula formula;
    formula.behavior = props.behavior;

    if (props.change == ChangeKind::same) {
        formula.conjuncts.push_back({Lhs::abs_diff, CmpOp::le, defaults.for_behavior(props.behavior)});
        return formula;
    }

    const bool decrease = props.change == ChangeKind::decrease;
    const Lhs diff = decrease ? Lhs::diff_ab : Lhs::diff_ba;
    const Lhs rel = decrease ? Lhs::rel_ab : Lhs::rel_ba;

    if (!props.quantity) {
        formula.conjuncts.push_back({diff, props.negated ? CmpOp::le : CmpOp::gt, Rational(0)});
        return formula;
    }

    const Rational n = props.quantity->unit == Unit::percent ? props.quantity->value / 100
                                                             : props.quantity->value;
    const Lhs lhs = props.quantity->unit == Unit::percent ? rel : diff;

    switch (props.modifier) {
        case Modifier::at_least:
        case Modifier::more_than:
            formula.conjuncts.push_back({lhs, props.negated ? CmpOp::le : CmpOp::ge, n});
            break;
        case Modifier::less_than:
            if (props.negated) {
                formula.conjuncts.push_back({lhs, CmpOp::ge, n});
            } else {
                formula.conjuncts.push_back({lhs, CmpOp::le, n});
                formula.conjuncts.push_back({diff, CmpOp::gt, Rational(0)});
            }
            break;
        case Modifier::none:
            formula.conjuncts.push_back({lhs, props.negated ? CmpOp::le : CmpOp::ge, n});
            break;
    }
    return formula;
}

onto::MatchedEntity resolve_pronoun(const Token& pron,
                                    const std::vector<onto::MatchedEntity>& prior_entities) {
    const std::string p = lower(pron.text);
    const bool person_only = p == "he" || p == "she" || p == "him" || p == "her";
    for (auto it = prior_entities.rbegin(); it != prior_entities.rend(); ++it) {
        if (!person_only || it->element == "pedestrian" || it->element == "bicyclist") {
            return *it;
        }
    }
    raise("UnresolvedPronoun", "inference",
          "pronoun '" + pron.text + "' has no compatible antecedent");
}

MetamorphicRelation build_mr(std::vector<MrBlock> blocks, std::string rule_text) {
    if (blocks.empty() || blocks.size() > 2)
        raise("MalformedRule", "inference", "a rule must have one or two if/then blocks");
    if (blocks[0].proposition.comparative)
        raise("MalformedRule", "inference", "comparative parameters require a second block");
    MetamorphicRelation mr;
    mr.blocks = std::move(blocks);
    mr.rule_text = std::move(rule_text);
    return mr;
}

FormulaEval evaluate_formula(const ExpectedChangeFormula& formula, double a, double b) {
    FormulaEval eval;
    for (std::size_t i = 0; i < formula.conjuncts.size(); ++i) {
        const Conjunct& c = formula.conjuncts[i];
        double value = 0.0;
        switch (c.lhs) {
            case Lhs::diff_ab: value = a - b; break;
            case Lhs::diff_ba: value = b - a; break;
            case Lhs::rel_ab:
            case Lhs::rel_ba:
                if (a == 0.0) {
                    eval.pass = false;
                    eval.degenerate = true;
                    eval.failed_conjunct = i;
                    return eval;
                }
                value = c.lhs == Lhs::rel_ab ? (a - b) / a : (b - a) / a;
                break;
            case Lhs::abs_diff: value = std::fabs(a - b); break;
        }
        const double rhs = c.rhs.to_double();
        bool ok = false;
        switch (c.op) {
            case CmpOp::gt: ok = value > rhs; break;
            case CmpOp::lt: ok = value < rhs; break;
            case CmpOp::ge: ok = value >= rhs; break;
            case CmpOp::le: ok = value <= rhs; break;
        }
        if (!ok) {
            eval.pass = false;
            eval.failed_conjunct = i;
            return eval;
        }
    }
    eval.pass = true;
    return eval;
}

ParseResult parse_rule(const std::string& rule_text, const onto::Ontology& ontology,
                       const ParseOptions& options) {
    lang::PosLexicon lexicon = lang::PosLexicon::defaults();
    ontology.extend_pos_lexicon(lexicon);

    auto blocks = lang::split_blocks(rule_text, lexicon);
    if (blocks.size() > 2)
        raise("MalformedRule", "tokenize", "at most two if/then blocks are supported");

    ParseResult result;
    std::vector<onto::MatchedEntity> seen_entities;
    std::vector<MrBlock> mr_blocks;

    for (auto& block : blocks) {
        block.if_clause = lang::pos_tag(std::move(block.if_clause), lexicon);
        block.then_clause = lang::pos_tag(std::move(block.then_clause), lexicon);

        MrBlock mr_block;
        if (block.order == 1) {
            const auto deps = lang::extract_dependencies(block.if_clause);
            mr_block.proposition = infer_transformation(block.if_clause, deps, ontology,
                                                        options.wup_threshold, &result.warnings);
        } else {
            // The second block inherits the first proposition and contributes
            // a comparative parameter; its subject must resolve to a prior
            // entity (by pronoun or by re-mention).
            mr_block.proposition = mr_blocks[0].proposition;
            const auto deps = lang::extract_dependencies(block.if_clause);
            if (const auto* nsubj = find_relation(deps, "NSUBJ")) {
                if (nsubj->dependent.pos == Pos::Pron) {
                    const auto resolved = resolve_pronoun(nsubj->dependent, seen_entities);
                    if (resolved.element != mr_block.proposition.target.element)
                        result.warnings.push_back("second block subject resolves to '" +
                                                  resolved.element + "'");
                } else {
                    const auto matched =
                        onto::match_element(nsubj->dependent, ontology, options.wup_threshold);
                    if (matched && matched->element != mr_block.proposition.target.element)
                        result.warnings.push_back("second block subject '" + matched->element +
                                                  "' differs from first block target");
                }
            }
            for (const Token& t : block.if_clause) {
                if (t.comparative && lower(t.text) != "more" && lower(t.text) != "less") {
                    mr_block.proposition.comparative = lower(t.text);
                    break;
                }
            }
        }

        const auto change = infer_expected_change(block.then_clause, ontology);
        mr_block.formula = build_formula(change, options.deltas);

        seen_entities.push_back(mr_block.proposition.target);
        if (mr_block.proposition.reference) seen_entities.push_back(*mr_block.proposition.reference);
        mr_blocks.push_back(std::move(mr_block));
    }

    result.mr = build_mr(std::move(mr_blocks), rule_text);
    return result;
}

namespace {

nlohmann::ordered_json entity_json(const onto::MatchedEntity& entity, bool include_empty_props) {
    nlohmann::ordered_json j;
    j["element"] = entity.element;
    if (include_empty_props || !entity.bound_properties.empty()) {
        nlohmann::ordered_json props = nlohmann::ordered_json::object();
        for (const auto& [k, v] : entity.bound_properties) props[k] = v;
        j["properties"] = props;
    }
    return j;
}

nlohmann::ordered_json rhs_json(const Rational& r) {
    if (r.is_integer()) return nlohmann::ordered_json(r.num());
    return nlohmann::ordered_json(r.to_decimal_string());
}

} // namespace

nlohmann::ordered_json proposition_to_json(const TransformationProposition& prop) {
    nlohmann::ordered_json j;
    j["kind"] = to_string(prop.kind);
    j["target"] = entity_json(prop.target, /*include_empty_props=*/true);
    j["reference"] = prop.reference ? entity_json(*prop.reference, false)
                                    : nlohmann::ordered_json(nullptr);
    j["position"] = prop.position ? nlohmann::ordered_json(to_string(*prop.position))
                                  : nlohmann::ordered_json(nullptr);
    if (prop.replace_kind) j["replace_kind"] = to_string(*prop.replace_kind);
    j["comparative"] = prop.comparative ? nlohmann::ordered_json(*prop.comparative)
                                        : nlohmann::ordered_json(nullptr);
    return j;
}

nlohmann::ordered_json mr_to_json(const MetamorphicRelation& mr) {
    nlohmann::ordered_json blocks = nlohmann::ordered_json::array();
    int order = 1;
    for (const auto& block : mr.blocks) {
        nlohmann::ordered_json formula;
        formula["behavior"] = to_string(block.formula.behavior);
        nlohmann::ordered_json conjuncts = nlohmann::ordered_json::array();
        for (const auto& c : block.formula.conjuncts) {
            nlohmann::ordered_json cj;
            cj["lhs"] = lhs_string(c.lhs, order);
            cj["op"] = to_string(c.op);
            cj["rhs"] = rhs_json(c.rhs);
            conjuncts.push_back(cj);
        }
        formula["conjuncts"] = conjuncts;
        nlohmann::ordered_json bj;
        bj["proposition"] = proposition_to_json(block.proposition);
        bj["formula"] = formula;
        blocks.push_back(bj);
        ++order;
    }
    nlohmann::ordered_json root;
    root["blocks"] = blocks;
    return root;
}

std::string dump_dependencies_jsonl(const std::vector<lang::DependencyPredicate>& deps) {
    std::string out;
    for (const auto& dep : deps) {
        nlohmann::ordered_json j;
        j["relation"] = dep.relation;
        j["dependent"] = dep.dependent.text;
        j["head"] = dep.head.text;
        out += j.dump();
        out += '\n';
    }
    return out;
}

} // namespace rmt::infer
