#include "rmt/ontology.hpp"

#include <algorithm>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace rmt::onto {

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

const std::set<std::string>& domain_targets(AssociationDomain domain) {
    static const std::set<std::string> transform = {"add", "remove", "replace"};
    static const std::set<std::string> change = {"increase", "decrease", "same"};
    return domain == AssociationDomain::transformation ? transform : change;
}

} // namespace

std::string to_string(Category c) {
    switch (c) {
        case Category::RoadNetwork: return "RoadNetwork";
        case Category::Object: return "Object";
        case Category::Environment: return "Environment";
    }
    return "Object";
}

Category category_from_string(const std::string& s) {
    if (s == "RoadNetwork") return Category::RoadNetwork;
    if (s == "Object") return Category::Object;
    if (s == "Environment") return Category::Environment;
    raise("SchemaError", "ontology", "unknown category '" + s + "'");
}

void Taxonomy::add_node(const std::string& name, const std::string& parent, bool builtin) {
    if (nodes_.count(name))
        raise("SchemaError", "ontology", "taxonomy node '" + name + "' already exists");
    Node node;
    node.builtin = builtin;
    if (parent.empty()) {
        if (!nodes_.empty()) raise("SchemaError", "ontology", "taxonomy must have a single root");
        node.depth = 1;
    } else {
        const auto it = nodes_.find(parent);
        if (it == nodes_.end())
            raise("SchemaError", "ontology", "taxonomy parent '" + parent + "' does not exist");
        node.parent = parent;
        node.depth = it->second.depth + 1;
    }
    nodes_.emplace(name, std::move(node));
    insertion_order_.push_back(name);
}

int Taxonomy::depth(const std::string& name) const {
    const auto it = nodes_.find(name);
    if (it == nodes_.end())
        raise("UnknownConcept", "ontology", "concept '" + name + "' not in taxonomy");
    return it->second.depth;
}

double Taxonomy::wup(const std::string& a, const std::string& b) const {
    const auto ia = nodes_.find(a);
    const auto ib = nodes_.find(b);
    if (ia == nodes_.end())
        raise("UnknownConcept", "ontology", "concept '" + a + "' not in taxonomy");
    if (ib == nodes_.end())
        raise("UnknownConcept", "ontology", "concept '" + b + "' not in taxonomy");

    std::set<std::string> ancestors;
    for (std::string cur = a; !cur.empty();) {
        ancestors.insert(cur);
        cur = nodes_.at(cur).parent;
    }
    std::string lcs;
    for (std::string cur = b; !cur.empty();) {
        if (ancestors.count(cur)) {
            lcs = cur;
            break;
        }
        cur = nodes_.at(cur).parent;
    }
    const int d_lcs = nodes_.at(lcs).depth;
    return 2.0 * d_lcs / (ia->second.depth + ib->second.depth);
}

std::vector<std::pair<std::string, std::string>> Taxonomy::edges(bool user_only) const {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& name : insertion_order_) {
        const Node& node = nodes_.at(name);
        if (node.parent.empty()) continue;
        if (user_only && node.builtin) continue;
        out.emplace_back(node.parent, name);
    }
    return out;
}

std::vector<std::string> Taxonomy::node_names() const { return insertion_order_; }

void AssociationLexicon::add(const std::string& lemma, const std::string& target, double score,
                             bool builtin) {
    auto& list = entries[lower(lemma)];
    list.push_back({lower(target), score, builtin});
    std::stable_sort(list.begin(), list.end(), [](const AssociationEntry& a, const AssociationEntry& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.target < b.target;
    });
}

std::optional<std::pair<std::string, double>> AssociationLexicon::best(
    const std::string& lemma, AssociationDomain domain) const {
    const auto it = entries.find(lower(lemma));
    if (it == entries.end()) return std::nullopt;
    const auto& targets = domain_targets(domain);
    for (const auto& entry : it->second) {
        if (targets.count(entry.target)) return std::make_pair(entry.target, entry.score);
    }
    return std::nullopt;
}

const OntologyElement* Ontology::find(const std::string& name) const {
    const std::string low = lower(name);
    for (const auto& e : elements) {
        if (e.name == low) return &e;
    }
    return nullptr;
}

std::vector<std::string> Ontology::element_names() const {
    std::vector<std::string> names;
    names.reserve(elements.size());
    for (const auto& e : elements) names.push_back(e.name);
    return names;
}

void Ontology::extend_pos_lexicon(lang::PosLexicon& lex) const {
    for (const auto& e : elements) {
        lex.add_noun(e.name);
        for (const auto& a : e.aliases) lex.add_noun(a);
    }
    for (const auto& a : alias_table) lex.add_noun(a.alias);
    for (const auto& node : taxonomy.node_names()) lex.add_noun(node);
    for (const auto& [lemma, targets] : lexicon.entries) {
        (void)targets;
        lex.add_verb(lemma);
    }
}

double wup_similarity(const std::string& a, const std::string& b, const Taxonomy& taxonomy) {
    return taxonomy.wup(lower(a), lower(b));
}

std::optional<MatchedEntity> match_element(const lang::Token& noun, const Ontology& ontology,
                                           double threshold) {
    const std::string lemma = lower(noun.lemma);
    const std::string text = lower(noun.text);

    for (const auto& alias : ontology.alias_table) {
        if (alias.alias == lemma || alias.alias == text) {
            MatchedEntity m;
            m.element = alias.element;
            m.bound_properties = alias.bound_properties;
            m.source_token_index = noun.index;
            m.similarity = 1.0;
            return m;
        }
    }

    const std::string noun_concept = ontology.taxonomy.contains(lemma) ? lemma
                                     : ontology.taxonomy.contains(text) ? text
                                                                        : std::string();
    if (noun_concept.empty()) return std::nullopt;

    std::optional<MatchedEntity> best;
    for (const auto& element : ontology.elements) {
        if (!ontology.taxonomy.contains(element.name)) continue;
        const double sim = ontology.taxonomy.wup(noun_concept, element.name);
        if (sim < threshold) continue;
        if (!best || sim > best->similarity ||
            (sim == best->similarity && element.name < best->element)) {
            MatchedEntity m;
            m.element = element.name;
            m.source_token_index = noun.index;
            m.similarity = sim;
            best = m;
        }
    }
    return best;
}

MatchedEntity match_properties(MatchedEntity entity,
                               const std::vector<lang::DependencyPredicate>& deps,
                               const Ontology& ontology, double threshold,
                               std::vector<std::string>* warnings) {
    const OntologyElement* element = ontology.find(entity.element);
    if (!element) return entity;

    for (const auto& dep : deps) {
        if (dep.relation != "AMOD" || dep.head.index != entity.source_token_index) continue;
        const std::string adj_lemma = lower(dep.dependent.lemma);
        const std::string adj_text = lower(dep.dependent.text);

        std::string best_prop, best_value;
        double best_score = 0.0;
        for (const auto& [prop, values] : element->properties) {
            if (entity.bound_properties.count(prop)) continue;
            for (const auto& value : values) {
                double score = 0.0;
                if (value == adj_lemma || value == adj_text) {
                    score = 1.0;
                } else if (ontology.taxonomy.contains(adj_lemma) &&
                           ontology.taxonomy.contains(value)) {
                    score = ontology.taxonomy.wup(adj_lemma, value);
                }
                if (score >= threshold && score > best_score) {
                    best_score = score;
                    best_prop = prop;
                    best_value = value;
                }
            }
        }
        if (!best_prop.empty()) {
            entity.bound_properties[best_prop] = best_value;
        } else if (warnings) {
            warnings->push_back("adjective '" + dep.dependent.text + "' matches no property of '" +
                                entity.element + "'");
        }
    }
    return entity;
}

std::optional<std::pair<std::string, double>> match_association(const lang::Token& verb,
                                                                const AssociationLexicon& lexicon,
                                                                AssociationDomain domain) {
    return lexicon.best(verb.lemma, domain);
}

// --- loading and merging -------------------------------------------------

namespace {

void rebuild_alias_table(Ontology& onto) {
    // Keep curated bound aliases installed by the defaults; rebuild the
    // derived entries (element names, plain aliases, environment values).
    std::vector<AliasBinding> curated;
    for (auto& a : onto.alias_table) {
        if (!a.bound_properties.empty()) curated.push_back(a);
    }
    onto.alias_table.clear();
    for (const auto& element : onto.elements) {
        onto.alias_table.push_back({element.name, element.name, {}});
        for (const auto& alias : element.aliases) {
            onto.alias_table.push_back({lower(alias), element.name, {}});
        }
        if (element.category == Category::Environment) {
            // Environment values double as nouns: "night", "rainy", ...
            for (const auto& [prop, values] : element.properties) {
                for (const auto& value : values) {
                    onto.alias_table.push_back({value, element.name, {{prop, value}}});
                }
            }
        }
    }
    for (auto& a : curated) onto.alias_table.push_back(std::move(a));
}

void merge_elements(Ontology& onto, const YAML::Node& elements) {
    if (!elements.IsSequence())
        raise("SchemaError", "ontology", "ontology.elements must be a sequence");
    int idx = 0;
    for (const auto& node : elements) {
        const std::string path = "ontology.elements[" + std::to_string(idx++) + "]";
        if (!node.IsMap()) raise("SchemaError", "ontology", path + " must be a map");
        if (!node["name"]) raise("SchemaError", "ontology", path + ".name is required");
        OntologyElement element;
        element.builtin = false;
        element.name = lower(node["name"].as<std::string>());
        if (onto.find(element.name))
            raise("DuplicateElement", "ontology",
                  "element '" + element.name + "' is already defined");
        if (!node["category"]) raise("SchemaError", "ontology", path + ".category is required");
        element.category = category_from_string(node["category"].as<std::string>());
        element.subcategory = node["subcategory"] ? node["subcategory"].as<std::string>() : "";
        if (node["properties"]) {
            if (!node["properties"].IsMap())
                raise("SchemaError", "ontology", path + ".properties must be a map");
            for (const auto& kv : node["properties"]) {
                std::vector<std::string> values;
                if (!kv.second.IsSequence())
                    raise("SchemaError", "ontology",
                          path + ".properties." + kv.first.as<std::string>() +
                              " must be a list of values");
                for (const auto& v : kv.second) values.push_back(lower(v.as<std::string>()));
                element.properties[lower(kv.first.as<std::string>())] = std::move(values);
            }
        }
        if (node["aliases"]) {
            if (!node["aliases"].IsSequence())
                raise("SchemaError", "ontology", path + ".aliases must be a sequence");
            for (const auto& a : node["aliases"]) element.aliases.push_back(lower(a.as<std::string>()));
        }
        onto.elements.push_back(std::move(element));
    }
}

void merge_taxonomy(Ontology& onto, const YAML::Node& edges) {
    if (!edges.IsSequence())
        raise("SchemaError", "ontology", "ontology.taxonomy must be a sequence of {parent, child}");
    int idx = 0;
    for (const auto& node : edges) {
        const std::string path = "ontology.taxonomy[" + std::to_string(idx++) + "]";
        if (!node.IsMap() || !node["parent"] || !node["child"])
            raise("SchemaError", "ontology", path + " must be {parent, child}");
        onto.taxonomy.add_node(lower(node["child"].as<std::string>()),
                               lower(node["parent"].as<std::string>()), /*builtin=*/false);
    }
}

void merge_lexicon(Ontology& onto, const YAML::Node& lexicon) {
    if (!lexicon.IsMap())
        raise("SchemaError", "ontology", "ontology.lexicon must map lemma to target entries");
    for (const auto& kv : lexicon) {
        const std::string lemma = lower(kv.first.as<std::string>());
        if (!kv.second.IsSequence())
            raise("SchemaError", "ontology", "ontology.lexicon." + lemma + " must be a sequence");
        for (const auto& entry : kv.second) {
            if (!entry.IsMap() || !entry["target"])
                raise("SchemaError", "ontology",
                      "ontology.lexicon." + lemma + " entries need a target");
            const std::string target = lower(entry["target"].as<std::string>());
            if (!domain_targets(AssociationDomain::transformation).count(target) &&
                !domain_targets(AssociationDomain::change).count(target))
                raise("SchemaError", "ontology",
                      "ontology.lexicon." + lemma + ": unknown target '" + target + "'");
            const double score = entry["score"] ? entry["score"].as<double>() : 1.0;
            if (score <= 0.0 || score > 1.0)
                raise("SchemaError", "ontology",
                      "ontology.lexicon." + lemma + ": score must be in (0, 1]");
            onto.lexicon.add(lemma, target, score, /*builtin=*/false);
        }
    }
}

} // namespace

Ontology builtin_ontology(); // ontology_defaults.cpp

Ontology load_ontology(const std::string& yaml_text) {
    Ontology onto = builtin_ontology();

    if (!yaml_text.empty()) {
        YAML::Node root;
        try {
            root = YAML::Load(yaml_text);
        } catch (const YAML::Exception& e) {
            raise("SchemaError", "ontology", std::string("invalid YAML: ") + e.what());
        }
        const YAML::Node section = root["ontology"];
        if (section) {
            if (section["elements"]) merge_elements(onto, section["elements"]);
            if (section["taxonomy"]) merge_taxonomy(onto, section["taxonomy"]);
            if (section["lexicon"]) merge_lexicon(onto, section["lexicon"]);
        }
    }
    rebuild_alias_table(onto);
    return onto;
}

std::string serialize_user_ontology(const Ontology& ontology) {
    YAML::Emitter out;
    out << YAML::BeginMap << YAML::Key << "ontology" << YAML::Value << YAML::BeginMap;

    out << YAML::Key << "elements" << YAML::Value << YAML::BeginSeq;
    for (const auto& e : ontology.elements) {
        if (e.builtin) continue;
        out << YAML::BeginMap;
        out << YAML::Key << "name" << YAML::Value << e.name;
        out << YAML::Key << "category" << YAML::Value << to_string(e.category);
        out << YAML::Key << "subcategory" << YAML::Value << e.subcategory;
        out << YAML::Key << "properties" << YAML::Value << YAML::BeginMap;
        for (const auto& [prop, values] : e.properties) {
            out << YAML::Key << prop << YAML::Value << YAML::Flow << values;
        }
        out << YAML::EndMap;
        out << YAML::Key << "aliases" << YAML::Value << YAML::Flow << e.aliases;
        out << YAML::EndMap;
    }
    out << YAML::EndSeq;

    out << YAML::Key << "taxonomy" << YAML::Value << YAML::BeginSeq;
    for (const auto& [parent, child] : ontology.taxonomy.edges(/*user_only=*/true)) {
        out << YAML::BeginMap;
        out << YAML::Key << "parent" << YAML::Value << parent;
        out << YAML::Key << "child" << YAML::Value << child;
        out << YAML::EndMap;
    }
    out << YAML::EndSeq;

    out << YAML::Key << "lexicon" << YAML::Value << YAML::BeginMap;
    for (const auto& [lemma, entries] : ontology.lexicon.entries) {
        bool any_user = false;
        for (const auto& e : entries) any_user = any_user || !e.builtin;
        if (!any_user) continue;
        out << YAML::Key << lemma << YAML::Value << YAML::BeginSeq;
        for (const auto& e : entries) {
            if (e.builtin) continue;
            out << YAML::BeginMap;
            out << YAML::Key << "target" << YAML::Value << e.target;
            out << YAML::Key << "score" << YAML::Value << e.score;
            out << YAML::EndMap;
        }
        out << YAML::EndSeq;
    }
    out << YAML::EndMap;

    out << YAML::EndMap << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

std::string format_ontology_table(const Ontology& ontology) {
    std::ostringstream out;
    out << "element               category      subcategory                          properties\n";
    out << "--------------------  ------------  -----------------------------------  ----------\n";
    for (const auto& e : ontology.elements) {
        std::string props;
        for (const auto& [prop, values] : e.properties) {
            if (!props.empty()) props += "; ";
            props += prop + ": [";
            for (std::size_t i = 0; i < values.size(); ++i) {
                if (i) props += ", ";
                props += values[i];
            }
            props += "]";
        }
        std::string aliases;
        for (std::size_t i = 0; i < e.aliases.size(); ++i) {
            if (i) aliases += ", ";
            aliases += e.aliases[i];
        }
        out << e.name;
        for (std::size_t i = e.name.size(); i < 22; ++i) out << ' ';
        out << to_string(e.category);
        for (std::size_t i = to_string(e.category).size(); i < 14; ++i) out << ' ';
        out << e.subcategory;
        for (std::size_t i = e.subcategory.size(); i < 37; ++i) out << ' ';
        out << (props.empty() ? "-" : props);
        if (!aliases.empty()) out << "  (aliases: " << aliases << ")";
        out << "\n";
    }
    return out.str();
}

} // namespace rmt::onto
