#include "rmt/rule_lang.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace rmt::lang {

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

bool is_word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '\'' || c == '/' ||
           c == '%' || c == '.';
}

bool all_digits(const std::string& s) {
    if (s.empty()) return false;
    bool dot = false;
    for (char c : s) {
        if (c == '.') {
            if (dot) return false;
            dot = true;
            continue;
        }
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    }
    return s != ".";
}

bool is_percent_text(const std::string& s) {
    return s.size() >= 2 && s.back() == '%' && all_digits(s.substr(0, s.size() - 1));
}

bool starts_with_number(const std::string& s) {
    return !s.empty() && std::isdigit(static_cast<unsigned char>(s[0]));
}

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

bool is_vowel(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; }

// Picks the best base form for a stripped -ed/-ing stem: the stem itself,
// the stem with a restored silent e, or the stem with an undoubled final
// consonant, preferring whichever the lexicon already knows.
std::string restore_stem(const std::string& stem, const PosLexicon& lexicon) {
    if (lexicon.knows_lemma(stem)) return stem;
    const std::string with_e = stem + "e";
    if (lexicon.knows_lemma(with_e)) return with_e;
    if (stem.size() >= 3) {
        const char last = stem[stem.size() - 1];
        const char prev = stem[stem.size() - 2];
        if (last == prev && !is_vowel(last)) {
            const std::string undoubled = stem.substr(0, stem.size() - 1);
            if (lexicon.knows_lemma(undoubled)) return undoubled;
        }
    }
    // No lexicon hit: restore e after a consonant+consonant cluster ending in
    // a typically e-final pattern is unguessable; keep the bare stem.
    return stem;
}

} // namespace

std::string to_string(Pos pos) {
    switch (pos) {
        case Pos::Noun: return "NOUN";
        case Pos::Verb: return "VERB";
        case Pos::Adj: return "ADJ";
        case Pos::Adv: return "ADV";
        case Pos::Num: return "NUM";
        case Pos::Percent: return "PERCENT";
        case Pos::Pron: return "PRON";
        case Pos::Adp: return "ADP";
        case Pos::Det: return "DET";
        case Pos::Part: return "PART";
        case Pos::Aux: return "AUX";
        case Pos::Other: return "OTHER";
    }
    return "OTHER";
}

void PosLexicon::add_noun(const std::string& word) {
    nouns.insert(lower(word));
    if (word.find(' ') != std::string::npos) {
        multiwords.push_back(lower(word));
    }
}

void PosLexicon::add_verb(const std::string& word) { verbs.insert(lower(word)); }

bool PosLexicon::knows_lemma(const std::string& word) const {
    return nouns.count(word) || verbs.count(word) || adjectives.count(word);
}

PosLexicon PosLexicon::defaults() {
    PosLexicon lex;
    lex.determiners = {"a", "an", "the", "this", "that", "these", "those", "every", "each",
                       "some", "any"};
    lex.pronouns = {"he", "she", "it", "they", "him", "her", "them", "his", "its", "their"};
    lex.auxiliaries = {"should", "shall", "must", "will", "would", "can", "could", "may",
                       "might", "do", "does", "did", "is", "are", "was", "were", "be", "been",
                       "being", "has", "have", "had"};
    lex.particles = {"down", "up", "off", "out", "away"};
    lex.negations = {"no", "not", "never", "n't"};
    lex.adverbs = {"least", "most", "more", "less", "very", "too", "quite", "soon",
                   "slightly", "closer", "nearer", "faster", "slower", "farther", "further",
                   "always", "still"};
    lex.prepositions = {
        {"on", "ON"},       {"onto", "ONTO"},   {"in", "IN"},     {"into", "INTO"},
        {"at", "AT"},       {"to", "TO"},       {"with", "WITH"}, {"from", "FROM"},
        {"of", "OF"},       {"by", "BY"},       {"near", "NEAR"}, {"under", "UNDER"},
        {"over", "OVER"},   {"behind", "BEHIND"}, {"before", "BEFORE"}, {"after", "AFTER"},
        {"in front of", "FRONT"}, {"than", "THAN"},
    };
    lex.adjectives = {"black", "white", "blue", "red", "green", "yellow", "gray", "silver",
                      "solid", "dash", "dotted", "vertical", "horizontal", "left",
                      "right", "forward", "reverse", "light", "normal", "heavy", "rainy",
                      "cloudy", "snowy", "sunny", "same", "small", "large", "big", "new",
                      "old", "slow", "fast", "dark", "bright", "circle", "square"};
    lex.comparatives = {"closer", "nearer", "faster", "slower", "more", "less", "higher",
                        "lower", "bigger", "smaller", "farther", "further"};
    lex.irregular_lemmas = {
        {"is", "be"},       {"are", "be"},     {"was", "be"},    {"were", "be"},
        {"been", "be"},     {"being", "be"},   {"has", "have"},  {"had", "have"},
        {"goes", "go"},     {"went", "go"},    {"gets", "get"},  {"got", "get"},
        {"men", "man"},     {"women", "woman"}, {"children", "child"}, {"people", "person"},
        {"buses", "bus"},   {"feet", "foot"},  {"does", "do"},   {"did", "do"},
        {"closer", "close"}, {"nearer", "near"}, {"faster", "fast"}, {"slower", "slow"},
        {"lanes", "lane"},  {"this", "this"},
    };
    // "at least" style modifier phrases stay as separate tokens; only real
    // multiword nouns and prepositions are merged.
    lex.multiwords = {"in front of", "speed limit sign", "speed limit signs", "slow speed sign",
                      "stop sign", "stop signs", "speed limit", "lane lines", "lane line",
                      "lane markings", "lane marking", "steering angle", "driving time",
                      "traffic sign", "traffic signs", "traffic light", "traffic lights",
                      "stop line", "yield line", "stop and yield line", "school bus",
                      "zebra crossing"};
    lex.multiword_lemmas = {{"speed limit signs", "speed limit sign"},
                            {"stop signs", "stop sign"},
                            {"lane lines", "lane line"},
                            {"lane markings", "lane marking"},
                            {"traffic signs", "traffic sign"},
                            {"traffic lights", "traffic light"}};
    lex.unit_words = {"km/h", "kmh", "kph", "mph", "m/s", "degrees", "degree", "deg"};
    lex.nouns = {"pedestrian", "roadside", "road", "sidewalk", "vehicle", "car", "truck",
                 "van", "bus", "bicycle", "bicyclist", "cyclist", "tree", "building",
                 "line", "lane", "crosswalk", "sign", "light", "speed", "velocity",
                 "angle", "steering", "ego-vehicle", "weather", "time", "day", "night",
                 "rain", "snow", "person", "man", "woman", "child", "driver", "wall",
                 "fence", "bridge", "street", "highway", "curb", "pavement"};
    lex.verbs = {"appear", "add", "show", "emerge", "place", "insert", "put", "remove",
                 "disappear", "erase", "delete", "vanish", "replace", "change", "become",
                 "turn", "switch", "transform", "update", "slow", "decrease", "decelerate",
                 "drop", "reduce", "brake", "increase", "accelerate", "speed", "rise",
                 "deviate", "keep", "maintain", "stay", "remain", "hold", "get", "move",
                 "drive", "stop", "cross", "walk", "ride", "come", "stand", "go"};
    return lex;
}

std::string lemmatize(const std::string& word, const PosLexicon& lexicon) {
    std::string w = lower(word);
    if (auto it = lexicon.multiword_lemmas.find(w); it != lexicon.multiword_lemmas.end())
        return it->second;
    if (w.find(' ') != std::string::npos) return w;
    if (auto it = lexicon.irregular_lemmas.find(w); it != lexicon.irregular_lemmas.end())
        return it->second;
    if (is_percent_text(w) || starts_with_number(w)) return w;
    if (lexicon.knows_lemma(w)) return w;

    if (ends_with(w, "ies") && w.size() > 4) return w.substr(0, w.size() - 3) + "y";
    if (ends_with(w, "sses")) return w.substr(0, w.size() - 2);
    if (ends_with(w, "shes") || ends_with(w, "ches") || ends_with(w, "xes") || ends_with(w, "zes"))
        return w.substr(0, w.size() - 2);
    if (ends_with(w, "ing") && w.size() > 5)
        return restore_stem(w.substr(0, w.size() - 3), lexicon);
    if (ends_with(w, "ed") && w.size() > 4)
        return restore_stem(w.substr(0, w.size() - 2), lexicon);
    if (ends_with(w, "s") && !ends_with(w, "ss") && !ends_with(w, "us") && !ends_with(w, "is") &&
        w.size() > 2)
        return w.substr(0, w.size() - 1);
    return w;
}

std::vector<Token> tokenize(const std::string& text, const PosLexicon& lexicon) {
    // Pass 1: raw word split. Keeps %, / and - inside words so "30%",
    // "km/h" and "ego-vehicle" survive; strips sentence punctuation.
    std::vector<std::string> raw;
    std::string current;
    for (char c : text) {
        if (is_word_char(c)) {
            current += c;
        } else {
            if (!current.empty()) raw.push_back(current);
            current.clear();
        }
    }
    if (!current.empty()) raw.push_back(current);
    // Trailing dots stick to words when sentences end without a space.
    for (auto& w : raw) {
        while (!w.empty() && (w.back() == '.' || w.back() == '-' || w.back() == '\'')) {
            if (w.back() == '.' && starts_with_number(w) && all_digits(w)) break;
            w.pop_back();
        }
    }
    raw.erase(std::remove_if(raw.begin(), raw.end(), [](const std::string& w) { return w.empty(); }),
              raw.end());

    // Pass 2: longest-match multiword merging.
    std::vector<std::string> merged;
    for (std::size_t i = 0; i < raw.size();) {
        std::size_t best_len = 0;
        std::string best;
        for (const auto& mw : lexicon.multiwords) {
            std::istringstream ss(mw);
            std::vector<std::string> parts;
            for (std::string p; ss >> p;) parts.push_back(p);
            if (parts.size() <= best_len || i + parts.size() > raw.size()) continue;
            bool match = true;
            for (std::size_t k = 0; k < parts.size(); ++k) {
                if (lower(raw[i + k]) != parts[k]) {
                    match = false;
                    break;
                }
            }
            if (match) {
                best_len = parts.size();
                best = mw;
            }
        }
        if (best_len > 1) {
            merged.push_back(best);
            i += best_len;
        } else {
            merged.push_back(raw[i]);
            ++i;
        }
    }

    // Pass 3: attach unit words to a preceding numeral.
    std::vector<std::string> words;
    for (std::size_t i = 0; i < merged.size(); ++i) {
        if (!words.empty() && all_digits(words.back()) &&
            lexicon.unit_words.count(lower(merged[i]))) {
            words.back() += " " + lower(merged[i]);
        } else {
            words.push_back(merged[i]);
        }
    }

    std::vector<Token> tokens;
    tokens.reserve(words.size());
    for (std::size_t i = 0; i < words.size(); ++i) {
        Token t;
        t.text = words[i];
        t.lemma = lemmatize(words[i], lexicon);
        t.index = static_cast<int>(i);
        const std::string low = lower(words[i]);
        if (is_percent_text(low)) {
            t.pos = Pos::Percent;
        } else if (starts_with_number(low)) {
            t.pos = Pos::Num;
        }
        tokens.push_back(std::move(t));
    }
    return tokens;
}

std::vector<Token> pos_tag(std::vector<Token> tokens, const PosLexicon& lexicon) {
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        Token& t = tokens[i];
        const std::string low = lower(t.text);
        t.comparative = lexicon.comparatives.count(low) > 0;
        if (t.pos == Pos::Percent || t.pos == Pos::Num) continue;

        if (lexicon.determiners.count(low)) {
            t.pos = Pos::Det;
        } else if (lexicon.pronouns.count(low)) {
            t.pos = Pos::Pron;
        } else if (lexicon.auxiliaries.count(low)) {
            t.pos = Pos::Aux;
        } else if (lexicon.negations.count(low) || lexicon.particles.count(low)) {
            t.pos = Pos::Part;
        } else if (lexicon.prepositions.count(low)) {
            t.pos = Pos::Adp;
        } else if (lexicon.adverbs.count(low)) {
            t.pos = Pos::Adv;
        } else {
            const bool after_aux = i > 0 && tokens[i - 1].pos == Pos::Aux;
            const bool after_det_or_adj =
                i > 0 && (tokens[i - 1].pos == Pos::Det || tokens[i - 1].pos == Pos::Adj);
            if (after_aux && lexicon.verbs.count(t.lemma)) {
                t.pos = Pos::Verb;
            } else if (lexicon.adjectives.count(t.lemma) || lexicon.adjectives.count(low)) {
                t.pos = Pos::Adj;
            } else if (after_det_or_adj) {
                t.pos = Pos::Noun;
            } else if (lexicon.verbs.count(t.lemma) && !lexicon.nouns.count(low)) {
                t.pos = Pos::Verb;
            } else if (lexicon.nouns.count(t.lemma) || lexicon.nouns.count(low)) {
                t.pos = Pos::Noun;
            } else if (lexicon.verbs.count(t.lemma)) {
                t.pos = Pos::Verb;
            } else if (ends_with(low, "ly")) {
                t.pos = Pos::Adv;
            } else {
                t.pos = Pos::Noun; // unknown open-class words default to NOUN
            }
        }
    }
    return tokens;
}

namespace {

struct LabelPos {
    std::size_t start; // position of the label word
    std::size_t end;   // one past the colon
    bool is_if;
};

std::string strip_clause(std::string s) {
    const auto is_trim = [](char c) {
        return std::isspace(static_cast<unsigned char>(c)) || c == ',' || c == '.' || c == ';' ||
               c == '~' || c == '"';
    };
    while (!s.empty() && is_trim(s.front())) s.erase(s.begin());
    while (!s.empty() && is_trim(s.back())) s.pop_back();
    return s;
}

// Case-insensitive word search honoring word boundaries.
std::size_t find_word(const std::string& text, const std::string& word, std::size_t from) {
    const std::string hay = lower(text);
    std::size_t pos = from;
    while ((pos = hay.find(word, pos)) != std::string::npos) {
        const bool left_ok = pos == 0 || !std::isalnum(static_cast<unsigned char>(hay[pos - 1]));
        const std::size_t after = pos + word.size();
        const bool right_ok =
            after >= hay.size() || !std::isalnum(static_cast<unsigned char>(hay[after]));
        if (left_ok && right_ok) return pos;
        ++pos;
    }
    return std::string::npos;
}

std::vector<LabelPos> find_labels(const std::string& text) {
    std::vector<LabelPos> labels;
    for (const bool want_if : {true, false}) {
        const std::string word = want_if ? "if" : "then";
        std::size_t pos = 0;
        while ((pos = find_word(text, word, pos)) != std::string::npos) {
            std::size_t after = pos + word.size();
            while (after < text.size() && std::isspace(static_cast<unsigned char>(text[after])))
                ++after;
            if (after < text.size() && text[after] == ':') {
                labels.push_back({pos, after + 1, want_if});
            }
            pos += word.size();
        }
    }
    std::sort(labels.begin(), labels.end(),
              [](const LabelPos& a, const LabelPos& b) { return a.start < b.start; });
    return labels;
}

std::vector<IftttBlock> split_labeled(const std::string& text, const std::vector<LabelPos>& labels,
                                      const PosLexicon& lexicon) {
    std::vector<IftttBlock> blocks;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const bool expect_if = i % 2 == 0;
        if (labels[i].is_if != expect_if)
            raise("MalformedRule", "tokenize",
                  expect_if ? "Then clause without a preceding If" : "If clause without a Then");
    }
    if (labels.size() % 2 != 0)
        raise("MalformedRule", "tokenize", "If clause without a matching Then");
    for (std::size_t i = 0; i + 1 < labels.size(); i += 2) {
        const std::size_t if_end = labels[i].end;
        const std::size_t then_start = labels[i + 1].start;
        const std::size_t then_end = labels[i + 1].end;
        const std::size_t next = i + 2 < labels.size() ? labels[i + 2].start : text.size();
        IftttBlock block;
        block.order = static_cast<int>(blocks.size() + 1);
        block.if_clause = tokenize(strip_clause(text.substr(if_end, then_start - if_end)), lexicon);
        block.then_clause = tokenize(strip_clause(text.substr(then_end, next - then_end)), lexicon);
        if (block.if_clause.empty() || block.then_clause.empty())
            raise("MalformedRule", "tokenize", "empty if or then clause");
        blocks.push_back(std::move(block));
    }
    return blocks;
}

std::vector<IftttBlock> split_sentences(const std::string& text, const PosLexicon& lexicon) {
    std::vector<std::size_t> if_starts;
    std::size_t pos = 0;
    while ((pos = find_word(text, "if", pos)) != std::string::npos) {
        if_starts.push_back(pos);
        pos += 2;
    }
    if (if_starts.empty()) {
        if (find_word(text, "then", 0) != std::string::npos)
            raise("MalformedRule", "tokenize", "Then clause without a preceding If");
        raise("MalformedRule", "tokenize", "no if/then pair found");
    }
    if (find_word(text, "then", 0) != std::string::npos && if_starts[0] > 0) {
        const std::size_t first_then = find_word(text, "then", 0);
        if (first_then < if_starts[0])
            raise("MalformedRule", "tokenize", "Then clause without a preceding If");
    }

    std::vector<IftttBlock> blocks;
    for (std::size_t i = 0; i < if_starts.size(); ++i) {
        const std::size_t seg_start = if_starts[i] + 2;
        const std::size_t seg_end = i + 1 < if_starts.size() ? if_starts[i + 1] : text.size();
        const std::string segment = text.substr(seg_start, seg_end - seg_start);
        const std::size_t then_pos = find_word(segment, "then", 0);
        if (then_pos == std::string::npos)
            raise("MalformedRule", "tokenize", "If clause without a matching Then");
        IftttBlock block;
        block.order = static_cast<int>(blocks.size() + 1);
        block.if_clause = tokenize(strip_clause(segment.substr(0, then_pos)), lexicon);
        block.then_clause = tokenize(strip_clause(segment.substr(then_pos + 4)), lexicon);
        if (block.if_clause.empty() || block.then_clause.empty())
            raise("MalformedRule", "tokenize", "empty if or then clause");
        blocks.push_back(std::move(block));
    }
    return blocks;
}

} // namespace

std::vector<IftttBlock> split_blocks(const std::string& text, const PosLexicon& lexicon) {
    if (text.empty()) raise("MalformedRule", "tokenize", "empty rule text");
    const auto labels = find_labels(text);
    if (!labels.empty()) return split_labeled(text, labels, lexicon);
    return split_sentences(text, lexicon);
}

std::vector<DependencyPredicate> extract_dependencies(const std::vector<Token>& clause) {
    const Token* root = nullptr;
    for (const Token& t : clause) {
        if (t.pos == Pos::Verb) {
            root = &t;
            break;
        }
    }
    if (!root) raise("NoRootVerb", "tag", "clause has no verb: '" + render_tokens(clause) + "'");

    std::vector<DependencyPredicate> deps;

    // NSUBJ: nearest noun or pronoun preceding the root.
    for (int i = root->index - 1; i >= 0; --i) {
        if (clause[i].pos == Pos::Noun || clause[i].pos == Pos::Pron) {
            deps.push_back({"NSUBJ", clause[i], *root});
            break;
        }
    }
    // DOBJ: first noun after the root with no intervening preposition.
    for (std::size_t i = root->index + 1; i < clause.size(); ++i) {
        if (clause[i].pos == Pos::Adp) break;
        if (clause[i].pos == Pos::Noun) {
            deps.push_back({"DOBJ", clause[i], *root});
            break;
        }
    }
    // Prepositional predicates: named after the preposition, first following noun.
    static const PosLexicon base = PosLexicon::defaults();
    for (std::size_t i = 0; i < clause.size(); ++i) {
        if (clause[i].pos != Pos::Adp) continue;
        for (std::size_t j = i + 1; j < clause.size(); ++j) {
            if (clause[j].pos == Pos::Noun) {
                std::string name;
                const auto it = base.prepositions.find(lower(clause[i].text));
                if (it != base.prepositions.end()) {
                    name = it->second;
                } else {
                    name = lower(clause[i].text);
                    std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) {
                        return static_cast<char>(std::toupper(c));
                    });
                }
                deps.push_back({name, clause[j], *root});
                break;
            }
            if (clause[j].pos == Pos::Adp || clause[j].pos == Pos::Verb) break;
        }
    }
    // AMOD: adjective to the next noun.
    for (std::size_t i = 0; i < clause.size(); ++i) {
        if (clause[i].pos != Pos::Adj) continue;
        for (std::size_t j = i + 1; j < clause.size(); ++j) {
            if (clause[j].pos == Pos::Noun) {
                deps.push_back({"AMOD", clause[i], clause[j]});
                break;
            }
        }
    }
    // ADVMOD / NPADVMOD hang on the root.
    for (const Token& t : clause) {
        if (t.pos == Pos::Adv) deps.push_back({"ADVMOD", t, *root});
    }
    for (const Token& t : clause) {
        if (t.pos == Pos::Num || t.pos == Pos::Percent) deps.push_back({"NPADVMOD", t, *root});
    }
    // DET to the next noun.
    for (std::size_t i = 0; i < clause.size(); ++i) {
        if (clause[i].pos != Pos::Det) continue;
        for (std::size_t j = i + 1; j < clause.size(); ++j) {
            if (clause[j].pos == Pos::Noun) {
                deps.push_back({"DET", clause[i], clause[j]});
                break;
            }
        }
    }
    return deps;
}

std::string render_tokens(const std::vector<Token>& tokens) {
    std::string out;
    for (const Token& t : tokens) {
        if (!out.empty()) out += ' ';
        out += t.text;
    }
    return out;
}

} // namespace rmt::lang
