#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rmt/error.hpp"
#include "rmt/rule_lang.hpp"

namespace rmt::onto {

enum class Category { RoadNetwork, Object, Environment };

std::string to_string(Category c);
Category category_from_string(const std::string& s);

struct OntologyElement {
    std::string name;        // canonical lowercase, e.g. "traffic sign"
    Category category = Category::Object;
    std::string subcategory; // path, e.g. "RoadPart/Line"
    std::map<std::string, std::vector<std::string>> properties;
    std::vector<std::string> aliases;
    bool builtin = true;

    bool operator==(const OntologyElement& o) const {
        return name == o.name && category == o.category && subcategory == o.subcategory &&
               properties == o.properties && aliases == o.aliases;
    }
};

/// Rooted hypernym tree; the root ("entity") has depth 1 and
/// depth(child) = depth(parent) + 1.
class Taxonomy {
  public:
    void add_node(const std::string& name, const std::string& parent, bool builtin = true);
    bool contains(const std::string& name) const { return nodes_.count(name) > 0; }
    int depth(const std::string& name) const;

    /// Wu-Palmer similarity 2*depth(lcs)/(depth(a)+depth(b)).
    /// Throws UnknownConcept when either side is missing.
    double wup(const std::string& a, const std::string& b) const;

    std::vector<std::pair<std::string, std::string>> edges(bool user_only) const;
    std::vector<std::string> node_names() const;

  private:
    struct Node {
        std::string parent; // empty for the root
        int depth = 1;
        bool builtin = true;
    };
    std::map<std::string, Node> nodes_;
    std::vector<std::string> insertion_order_;
};

struct MatchedEntity {
    std::string element; // OntologyElement name
    std::map<std::string, std::string> bound_properties;
    int source_token_index = -1;
    double similarity = 1.0;

    bool operator==(const MatchedEntity& o) const {
        return element == o.element && bound_properties == o.bound_properties;
    }
};

enum class AssociationDomain { transformation, change };

struct AssociationEntry {
    std::string target; // add/remove/replace or increase/decrease/same
    double score = 1.0;
    bool builtin = true;
};

/// lemma -> candidate targets, scores descending.
struct AssociationLexicon {
    std::map<std::string, std::vector<AssociationEntry>> entries;

    void add(const std::string& lemma, const std::string& target, double score,
             bool builtin = true);
    std::optional<std::pair<std::string, double>> best(const std::string& lemma,
                                                       AssociationDomain domain) const;
};

struct AliasBinding {
    std::string alias;   // surface string, possibly multiword
    std::string element; // target element name
    std::map<std::string, std::string> bound_properties;
};

struct Ontology {
    std::vector<OntologyElement> elements;
    Taxonomy taxonomy;
    AssociationLexicon lexicon;
    std::vector<AliasBinding> alias_table; // derived at load time

    const OntologyElement* find(const std::string& name) const;
    std::vector<std::string> element_names() const;

    /// Feed element names, aliases and lexicon lemmas into the tagger lexicon
    /// as open-class priors.
    void extend_pos_lexicon(lang::PosLexicon& lex) const;
};

/// Built-in defaults merged with a user YAML document (may be empty).
/// Throws SchemaError / DuplicateElement.
Ontology load_ontology(const std::string& yaml_text);

/// Serializes only the user additions; loading the result reproduces the
/// same merged ontology.
std::string serialize_user_ontology(const Ontology& ontology);

/// Human-readable merged table for `ontology show`.
std::string format_ontology_table(const Ontology& ontology);

double wup_similarity(const std::string& a, const std::string& b, const Taxonomy& taxonomy);

std::optional<MatchedEntity> match_element(const lang::Token& noun, const Ontology& ontology,
                                           double threshold);

/// Binds AMOD adjectives whose head is the entity's token to allowed property
/// values; exact value match first, taxonomy similarity above the threshold
/// otherwise. Unmatched adjectives land in `warnings`.
MatchedEntity match_properties(MatchedEntity entity,
                               const std::vector<lang::DependencyPredicate>& deps,
                               const Ontology& ontology, double threshold,
                               std::vector<std::string>* warnings = nullptr);

std::optional<std::pair<std::string, double>> match_association(const lang::Token& verb,
                                                                const AssociationLexicon& lexicon,
                                                                AssociationDomain domain);

} // namespace rmt::onto
