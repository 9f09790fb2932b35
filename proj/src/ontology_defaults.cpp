#include "rmt/ontology.hpp"

namespace rmt::onto {

namespace {

OntologyElement make(const std::string& name, Category cat, const std::string& sub,
                     std::map<std::string, std::vector<std::string>> props,
                     std::vector<std::string> aliases) {
    OntologyElement e;
    e.name = name;
    e.category = cat;
    e.subcategory = sub;
    e.properties = std::move(props);
    e.aliases = std::move(aliases);
    e.builtin = true;
    return e;
}

} // namespace

Ontology builtin_ontology() {
    Ontology onto;

    onto.elements = {
        make("lane", Category::RoadNetwork, "RoadPart/Lane",
             {{"direction", {"forward", "reverse"}},
              {"orientation", {"vertical", "horizontal"}},
              {"position", {"left", "right"}}},
             {}),
        make("line", Category::RoadNetwork, "RoadPart/Line",
             {{"color", {"white", "yellow"}}, {"type", {"solid", "dash"}}},
             {"lane line", "lane marking", "marking"}),
        make("crosswalk", Category::RoadNetwork, "RoadPart/Crosswalk",
             {{"orientation", {"vertical", "horizontal"}}}, {"zebra crossing"}),
        make("sidewalk", Category::RoadNetwork, "RoadPart/Sidewalk", {},
             {"roadside", "curb", "curbside", "pavement"}),
        make("traffic sign", Category::RoadNetwork, "TrafficInfrastructure/TrafficSign",
             {{"shape", {"circle", "square"}}, {"type", {"stop", "speed limit", "turn"}}},
             {"sign", "road sign"}),
        make("traffic light", Category::RoadNetwork, "TrafficInfrastructure/TrafficLight",
             {{"color", {"red", "yellow", "green"}}}, {"stoplight", "signal light"}),
        make("stop and yield line", Category::RoadNetwork,
             "TrafficInfrastructure/StopAndYieldLine", {}, {"stop line", "yield line"}),
        make("tree", Category::Object, "StaticObject/Tree", {}, {}),
        make("building", Category::Object, "StaticObject/Building", {}, {}),
        make("pedestrian", Category::Object, "DynamicObject/Pedestrian", {}, {}),
        make("vehicle", Category::Object, "DynamicObject/Vehicle",
             {{"color", {"white", "black", "blue", "red", "green", "yellow", "silver", "gray"}},
              {"type", {"car", "truck", "van", "school bus"}}},
             {"car", "truck", "van", "automobile"}),
        make("bicyclist", Category::Object, "DynamicObject/Bicyclist", {}, {"cyclist", "biker"}),
        make("weather", Category::Environment, "Weather",
             {{"condition", {"sunny", "rainy", "cloudy", "snowy"}},
              {"level", {"light", "normal", "heavy"}}},
             {}),
        make("time", Category::Environment, "Time", {{"period", {"day", "night"}}},
             {"driving time"}),
    };

    // Hypernym taxonomy. Depths are calibrated so that person sits at depth 8
    // and pedestrian at depth 10, reproducing wup(person, pedestrian) = 8/9.
    const std::pair<const char*, const char*> edges[] = {
        {"entity", ""},
        {"physical entity", "entity"},
        {"abstraction", "entity"},
        {"object", "physical entity"},
        {"process", "physical entity"},
        {"attribute", "abstraction"},
        {"measure", "abstraction"},
        {"relation", "abstraction"},
        {"whole", "object"},
        {"part", "object"},
        {"location", "object"},
        {"state", "attribute"},
        {"shape", "attribute"},
        {"property", "attribute"},
        {"time", "measure"},
        {"quantity", "measure"},
        // time of day
        {"day", "time"},
        {"night", "time"},
        {"morning", "time"},
        {"evening", "time"},
        {"noon", "time"},
        {"midnight", "time"},
        {"dawn", "time"},
        {"dusk", "time"},
        {"afternoon", "time"},
        // weather states
        {"condition", "state"},
        {"weather", "condition"},
        {"illness", "condition"},
        {"rain", "weather"},
        {"snow", "weather"},
        {"fog", "weather"},
        {"storm", "weather"},
        {"cloudiness", "weather"},
        {"sunshine", "weather"},
        {"wind", "weather"},
        {"hail", "weather"},
        {"drizzle", "weather"},
        {"mist", "weather"},
        // living things
        {"living thing", "whole"},
        {"organism", "living thing"},
        {"animal", "organism"},
        {"plant", "organism"},
        {"person", "animal"},
        {"domestic animal", "animal"},
        {"wild animal", "animal"},
        {"bird", "animal"},
        {"insect", "animal"},
        {"traveler", "person"},
        {"man", "person"},
        {"woman", "person"},
        {"child", "person"},
        {"adult", "person"},
        {"worker", "person"},
        {"driver", "person"},
        {"officer", "person"},
        {"student", "person"},
        {"pedestrian", "traveler"},
        {"rider", "traveler"},
        {"passenger", "traveler"},
        {"walker", "traveler"},
        {"bicyclist", "rider"},
        {"cyclist", "rider"},
        {"motorist", "rider"},
        {"boy", "child"},
        {"girl", "child"},
        {"dog", "domestic animal"},
        {"cat", "domestic animal"},
        {"horse", "domestic animal"},
        {"cow", "domestic animal"},
        {"sheep", "domestic animal"},
        {"deer", "wild animal"},
        {"bear", "wild animal"},
        {"rabbit", "wild animal"},
        {"squirrel", "wild animal"},
        {"vascular plant", "plant"},
        {"woody plant", "vascular plant"},
        {"herb", "vascular plant"},
        {"grass", "herb"},
        {"flower", "herb"},
        {"tree", "woody plant"},
        {"shrub", "woody plant"},
        {"bush", "woody plant"},
        {"oak", "tree"},
        {"pine", "tree"},
        // artifacts
        {"artifact", "whole"},
        {"natural object", "whole"},
        {"rock", "natural object"},
        {"way", "artifact"},
        {"structure", "artifact"},
        {"instrumentality", "artifact"},
        {"marking", "artifact"},
        {"sign", "artifact"},
        {"covering", "artifact"},
        {"road", "way"},
        {"path", "way"},
        {"passage", "way"},
        {"track", "way"},
        {"lane", "road"},
        {"street", "road"},
        {"highway", "road"},
        {"roadway", "road"},
        {"roadside", "road"},
        {"freeway", "road"},
        {"intersection", "road"},
        {"roundabout", "road"},
        {"ramp", "road"},
        {"shoulder", "road"},
        {"walkway", "path"},
        {"trail", "path"},
        {"sidewalk", "walkway"},
        {"crossing", "passage"},
        {"crosswalk", "crossing"},
        {"building", "structure"},
        {"bridge", "structure"},
        {"tunnel", "structure"},
        {"platform", "structure"},
        {"tower", "structure"},
        {"obstruction", "structure"},
        {"house", "building"},
        {"school", "building"},
        {"skyscraper", "building"},
        {"garage", "building"},
        {"hotel", "building"},
        {"church", "building"},
        {"station", "building"},
        {"warehouse", "building"},
        {"apartment", "building"},
        {"wall", "obstruction"},
        {"fence", "obstruction"},
        {"barrier", "obstruction"},
        {"guardrail", "obstruction"},
        {"conveyance", "instrumentality"},
        {"device", "instrumentality"},
        {"equipment", "instrumentality"},
        {"container", "instrumentality"},
        {"vehicle", "conveyance"},
        {"public transport", "conveyance"},
        {"motor vehicle", "vehicle"},
        {"bicycle", "vehicle"},
        {"wagon", "vehicle"},
        {"sled", "vehicle"},
        {"trailer", "vehicle"},
        {"car", "motor vehicle"},
        {"truck", "motor vehicle"},
        {"van", "motor vehicle"},
        {"bus", "motor vehicle"},
        {"taxi", "motor vehicle"},
        {"motorcycle", "motor vehicle"},
        {"ambulance", "motor vehicle"},
        {"tractor", "motor vehicle"},
        {"sedan", "car"},
        {"suv", "car"},
        {"pickup", "truck"},
        {"school bus", "bus"},
        {"minivan", "van"},
        {"signaling device", "device"},
        {"machine", "device"},
        {"instrument", "device"},
        {"camera", "device"},
        {"sensor", "device"},
        {"radar", "sensor"},
        {"traffic light", "signaling device"},
        {"beacon", "signaling device"},
        {"siren", "signaling device"},
        {"line", "marking"},
        {"symbol", "marking"},
        {"arrow", "symbol"},
        {"stop and yield line", "line"},
        {"lane line", "line"},
        {"centerline", "line"},
        {"edge line", "line"},
        {"traffic sign", "sign"},
        {"signboard", "sign"},
        {"street sign", "sign"},
        {"stop sign", "traffic sign"},
        {"speed limit sign", "traffic sign"},
        {"yield sign", "traffic sign"},
        {"warning sign", "traffic sign"},
        {"billboard", "signboard"},
    };
    for (const auto& [child, parent] : edges) {
        onto.taxonomy.add_node(child, parent);
    }

    // Verb associations: transformations.
    auto& lex = onto.lexicon;
    lex.add("appear", "add", 1.0);
    lex.add("add", "add", 1.0);
    lex.add("show", "add", 0.9);
    lex.add("emerge", "add", 0.8);
    lex.add("place", "add", 0.8);
    lex.add("insert", "add", 0.8);
    lex.add("put", "add", 0.7);
    lex.add("remove", "remove", 1.0);
    lex.add("disappear", "remove", 0.9);
    lex.add("erase", "remove", 0.9);
    lex.add("delete", "remove", 0.8);
    lex.add("vanish", "remove", 0.7);
    lex.add("replace", "replace", 1.0);
    lex.add("change", "replace", 0.9);
    lex.add("become", "replace", 0.8);
    lex.add("turn", "replace", 0.8);
    lex.add("switch", "replace", 0.7);
    lex.add("transform", "replace", 0.7);
    lex.add("update", "replace", 0.7);
    // Expected changes.
    lex.add("decrease", "decrease", 1.0);
    lex.add("slow", "decrease", 1.0);
    lex.add("decelerate", "decrease", 0.9);
    lex.add("drop", "decrease", 0.8);
    lex.add("reduce", "decrease", 0.8);
    lex.add("brake", "decrease", 0.7);
    lex.add("increase", "increase", 1.0);
    lex.add("accelerate", "increase", 0.9);
    lex.add("speed", "increase", 0.8);
    lex.add("rise", "increase", 0.7);
    lex.add("deviate", "increase", 0.6);
    lex.add("same", "same", 1.0);
    lex.add("keep", "same", 1.0);
    lex.add("maintain", "same", 0.9);
    lex.add("stay", "same", 0.8);
    lex.add("remain", "same", 0.8);
    lex.add("unchanged", "same", 0.8);
    lex.add("hold", "same", 0.7);

    // Curated aliases that bind a property value up front.
    onto.alias_table = {
        {"speed limit sign", "traffic sign", {{"type", "speed limit"}}},
        {"slow speed sign", "traffic sign", {{"type", "speed limit"}}},
        {"stop sign", "traffic sign", {{"type", "stop"}}},
        {"daytime", "time", {{"period", "day"}}},
        {"nighttime", "time", {{"period", "night"}}},
        {"rain", "weather", {{"condition", "rainy"}}},
        {"snow", "weather", {{"condition", "snowy"}}},
        {"sunshine", "weather", {{"condition", "sunny"}}},
    };

    return onto;
}

} // namespace rmt::onto
