#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rmt/error.hpp"

namespace rmt::lang {

enum class Pos {
    Noun,
    Verb,
    Adj,
    Adv,
    Num,
    Percent,
    Pron,
    Adp,
    Det,
    Part,
    Aux,
    Other,
};

std::string to_string(Pos pos);

struct Token {
    std::string text;   // surface form after multiword/unit merging
    std::string lemma;  // lowercased base form
    Pos pos = Pos::Other;
    int index = 0;      // 0-based position within its clause
    bool comparative = false;

    bool operator==(const Token&) const = default;
};

struct IftttBlock {
    std::vector<Token> if_clause;
    std::vector<Token> then_clause;
    int order = 1; // 1-based, textual order
};

/// One grammatical relation, e.g. NSUBJ(pedestrian, appears). Relation names
/// are uppercase; prepositions contribute predicates named after themselves
/// (ON, TO, WITH, ...), with "in front of" collapsed to FRONT.
struct DependencyPredicate {
    std::string relation;
    Token dependent;
    Token head;
};

/// Word lists driving the deterministic tagger. Built-in defaults cover the
/// controlled rule grammar; the ontology and association lexicons are merged
/// in as open-class priors when a pipeline is assembled.
struct PosLexicon {
    std::set<std::string> determiners;
    std::set<std::string> pronouns;
    std::set<std::string> auxiliaries;
    std::set<std::string> particles;
    std::set<std::string> negations;
    std::set<std::string> adverbs;
    std::map<std::string, std::string> prepositions; // surface -> relation name
    std::set<std::string> nouns;
    std::set<std::string> verbs;
    std::set<std::string> adjectives;
    std::set<std::string> comparatives;
    std::map<std::string, std::string> irregular_lemmas;
    std::vector<std::string> multiwords;      // longest-match merged into one token
    std::map<std::string, std::string> multiword_lemmas;
    std::set<std::string> unit_words;         // merged onto a preceding numeral

    static PosLexicon defaults();

    void add_noun(const std::string& word);
    void add_verb(const std::string& word);
    /// Known base forms consulted by the lemmatizer when undoing -ed/-ing.
    bool knows_lemma(const std::string& word) const;
};

/// Lowercases and strips inflection: plural/3rd-person -s, -ed, -ing with
/// doubled-consonant and silent-e restoration, plus the irregular table.
std::string lemmatize(const std::string& word, const PosLexicon& lexicon);

std::vector<Token> tokenize(const std::string& text, const PosLexicon& lexicon);

/// Assigns a part of speech to every token; closed classes first, then
/// lexicon lookups, then suffix heuristics; unknown words default to NOUN.
std::vector<Token> pos_tag(std::vector<Token> tokens, const PosLexicon& lexicon);

/// Splits a rule into if/then blocks. Accepts the labeled form
/// "If: ... Then: ..." and the sentence form "If ..., then ...".
std::vector<IftttBlock> split_blocks(const std::string& text, const PosLexicon& lexicon);

/// Deterministic pattern extraction over a tagged clause. Throws NoRootVerb
/// when the clause has no verb.
std::vector<DependencyPredicate> extract_dependencies(const std::vector<Token>& clause);

/// Joins token texts with single spaces (round-trip helper).
std::string render_tokens(const std::vector<Token>& tokens);

} // namespace rmt::lang
