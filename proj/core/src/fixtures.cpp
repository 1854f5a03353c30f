#include "dvl/fixtures.hpp"

#include <filesystem>
#include <fstream>

#include "dvl/hive.hpp"
#include "dvl/render.hpp"

namespace dvl {

namespace {

Fixture gallery_scatter() {
    Fixture fx;
    fx.name = "gallery-scatter";
    fx.files["t.csv"] = "a,b\n1,5\n2,3\n3,8\n4,1\n5,6\n6,4\n7,9\n";
    fx.manifest = R"x({"tables":[{"name":"T","path":"t.csv"}]})x";
    fx.spec = R"x({
      "width": 800, "height": 600,
      "views": [{"name":"V","table":"T","mark":"point",
                 "encodings":{"x":{"field":"a"},"y":{"field":"b"}}}]
    })x";
    return fx;
}

// D1: both attributes normalized into their own dimension tables; the fact
// table's references are preserved by sharing the dimension scales.
Fixture gallery_punchcard() {
    Fixture fx;
    fx.name = "gallery-punchcard";
    fx.files["t.csv"] = "a,b\np,u\nq,v\nr,u\np,v\nq,u\nr,w\n";
    fx.manifest = R"x({
      "tables":[{"name":"T","path":"t.csv"}],
      "prep":{"steps":[
        {"op":"normalize","table":"T","attrs":["a"],"dim":"A","fact":"T1"},
        {"op":"normalize","table":"T1","attrs":["b"],"dim":"B","fact":"TF"},
        {"op":"drop","table":"T"},
        {"op":"drop","table":"T1"}
      ]}
    })x";
    fx.spec = R"x({
      "width": 800, "height": 600,
      "scales": {"sa":{"type":"linear"},"sb":{"type":"linear"}},
      "views": [
        {"name":"VT","table":"TF","mark":"point",
         "encodings":{"x":{"field":"B_id","scale":"sb"},
                      "y":{"field":"A_id","scale":"sa"},
                      "r":{"const":6}}},
        {"name":"VA","table":"A","mark":"label",
         "encodings":{"x":{"const":20},"y":{"field":"id","scale":"sa"},
                      "text":{"field":"a"}}},
        {"name":"VB","table":"B","mark":"label",
         "encodings":{"x":{"field":"id","scale":"sb"},"y":{"const":20},
                      "text":{"field":"b"}}}
      ]
    })x";
    return fx;
}

// D1 rendered as parallel axes with the fact rows as links; the link
// endpoints are foreign references into the two dot views.
Fixture gallery_parallel_coords() {
    Fixture fx;
    fx.name = "gallery-parallel-coords";
    fx.files["t.csv"] = "a,b\n10,15\n20,25\n30,35\n";
    fx.manifest = R"x({
      "tables":[{"name":"T","path":"t.csv"}],
      "prep":{"steps":[
        {"op":"normalize","table":"T","attrs":["a"],"dim":"A","fact":"T1"},
        {"op":"normalize","table":"T1","attrs":["b"],"dim":"B","fact":"TF"},
        {"op":"drop","table":"T"},
        {"op":"drop","table":"T1"}
      ]}
    })x";
    fx.spec = R"x({
      "width": 800, "height": 600,
      "views": [
        {"name":"VA","table":"A","mark":"point",
         "encodings":{"x":{"const":100},"y":{"field":"a"}}},
        {"name":"VB","table":"B","mark":"point",
         "encodings":{"x":{"const":700},"y":{"field":"b"}}},
        {"name":"VT","table":"TF","mark":"link",
         "encodings":{
           "x1":{"ref":{"view":"VA","filter":["A_id"],"props":{"x1":"x","y1":"y"}}},
           "x2":{"ref":{"view":"VB","filter":["B_id"],"props":{"x2":"x","y2":"y"}}}}}
      ]
    })x";
    return fx;
}

// D2: b normalized out, the dimension rendered as rectangles hosting the
// fact rows as nested scatterplots.
Fixture gallery_small_multiples(bool nested) {
    Fixture fx;
    fx.name = nested ? "gallery-small-multiples" : "small-multiples-unnested";
    fx.expect_faithful = nested;
    fx.files["t.csv"] = "a,b\n1,x\n2,x\n3,y\n4,y\n5,z\n";
    fx.manifest = R"x({
      "tables":[{"name":"T","path":"t.csv"}],
      "prep":{"steps":[
        {"op":"normalize","table":"T","attrs":["b"],"dim":"B2","fact":"A2"},
        {"op":"drop","table":"T"}
      ]}
    })x";
    std::string nests = nested ? R"x(,"nests":[{"child":"VA","parent":"VB"}])x" : "";
    fx.spec = R"x({
      "width": 800, "height": 600,
      "views": [
        {"name":"VB","table":"B2","mark":"rect",
         "encodings":{"x":{"field":"b"},"y":{"const":100},
                      "w":{"const":120},"h":{"const":160},
                      "stroke":{"const":"black"},"fill":{"const":"none"}}},
        {"name":"VA","table":"A2","mark":"point",
         "encodings":{"x":{"const":60},"y":{"field":"a"}}}
      ])x" + nests + "}";
    return fx;
}

// D2 as a categorical scatterplot: the reference column and the dimension
// key run through one named scale (or two private ones, in the broken twin).
Fixture gallery_categorical(bool shared) {
    Fixture fx;
    fx.name = shared ? "gallery-categorical-scatter" : "categorical-unshared";
    fx.expect_faithful = shared;
    fx.files["a2.csv"] = "id,a,bid\n0,11,0\n1,22,1\n2,33,2\n3,44,0\n4,55,1\n";
    // category 3 is never referenced, so private domains differ
    fx.files["b2.csv"] = "id,b\n0,low\n1,mid\n2,high\n3,extra\n";
    fx.manifest = R"x({
      "tables":[{"name":"A2","path":"a2.csv","keys":[["id"]]},
                {"name":"B2","path":"b2.csv","keys":[["id"]]}],
      "constraints":[{"name":"C","src":{"table":"A2","attrs":["bid"]},
                      "dst":{"table":"B2","attrs":["id"]}}]
    })x";
    std::string scale_attr = shared ? R"x(,"scale":"sbid")x" : "";
    fx.spec = std::string(R"x({
      "width": 800, "height": 600,
      "scales": {"sbid":{"type":"linear"}},
      "views": [
        {"name":"VA","table":"A2","mark":"point",
         "encodings":{"x":{"field":"bid")x") + scale_attr + R"x(},"y":{"field":"a"}}},
        {"name":"VB","table":"B2","mark":"label",
         "encodings":{"x":{"field":"id")x" + scale_attr + R"x(},"y":{"const":20},
                      "text":{"field":"b"}}}
      ]
    })x";
    if (!shared) {
        // drop the now-unused named scale so the spec stays tidy
        size_t pos = fx.spec.find("\"scales\": {\"sbid\":{\"type\":\"linear\"}},");
        fx.spec.erase(pos, std::string("\"scales\": {\"sbid\":{\"type\":\"linear\"}},").size());
    }
    return fx;
}

// D3: two entity tables in a 1-1 relationship rendered as a two-column
// table; rows align through the shared row scale.
Fixture gallery_table() {
    Fixture fx;
    fx.name = "gallery-table";
    fx.files["a.csv"] = "id,a\n0,alpha\n1,bravo\n2,charlie\n3,delta\n";
    fx.files["b.csv"] = "id,b\n0,ant\n1,bee\n2,cat\n3,dog\n";
    fx.manifest = R"x({
      "tables":[{"name":"A","path":"a.csv","keys":[["id"]]},
                {"name":"B","path":"b.csv","keys":[["id"]]}],
      "constraints":[{"name":"C","src":{"table":"A","attrs":["id"]},
                      "dst":{"table":"B","attrs":["id"]}}]
    })x";
    fx.spec = R"x({
      "width": 800, "height": 600,
      "scales": {"sy":{"type":"linear","range":[40,560]}},
      "views": [
        {"name":"VA","table":"A","mark":"label",
         "encodings":{"x":{"const":0},"y":{"field":"id","scale":"sy"},
                      "text":{"field":"a"},"w":{"const":"5em"}}},
        {"name":"VB","table":"B","mark":"label",
         "encodings":{"x":{"ref":{"view":"VA","filter":null,
                                  "agg":{"op":"max","over":"x + w"}}},
                      "y":{"field":"id","scale":"sy"},
                      "text":{"field":"b"},"w":{"const":"5em"}}}
      ]
    })x";
    return fx;
}

const char* kNodesCsv = "id,age,sal\n1,30,50\n2,40,60\n3,50,55\n4,60,45\n";

Fixture nodelink(bool with_refs) {
    Fixture fx;
    fx.name = with_refs ? "nodelink" : "nodelink-noref";
    fx.expect_faithful = with_refs;
    fx.files["n.csv"] = kNodesCsv;
    fx.files["e.csv"] = "s,t\n1,2\n2,3\n3,4\n4,1\n";
    fx.manifest = R"x({
      "tables":[{"name":"N","path":"n.csv","keys":[["id"]]},
                {"name":"E","path":"e.csv"}],
      "constraints":[
        {"name":"C1","src":{"table":"E","attrs":["s"]},"dst":{"table":"N","attrs":["id"]}},
        {"name":"C2","src":{"table":"E","attrs":["t"]},"dst":{"table":"N","attrs":["id"]}}]
    })x";
    std::string start = with_refs
        ? R"x("x1":{"ref":{"view":"VN","filter":["s"],"props":{"x1":"x","y1":"y"}}})x"
        : R"x("x1":{"const":5},"y1":{"const":5})x";
    fx.spec = std::string(R"x({
      "width": 800, "height": 600,
      "views": [
        {"name":"VN","table":"N","mark":"point",
         "encodings":{"x":{"field":"age"},"y":{"field":"sal"}}},
        {"name":"VE","table":"E","mark":"link",
         "encodings":{)x") + start + R"x(,
           "x2":{"ref":{"view":"VN","filter":["t"],"props":{"x2":"x","y2":"y"}}}}}
      ]
    })x";
    return fx;
}

// The single-table construction: endpoint coordinates precomputed into the
// edge table. Nothing ties the link view back to the node marks.
Fixture nodelink_broken() {
    Fixture fx;
    fx.name = "nodelink-broken";
    fx.expect_faithful = false;
    fx.files["n.csv"] = kNodesCsv;
    fx.files["eprime.csv"] =
        "s,t,age1,sal1,age2,sal2\n1,2,30,50,40,60\n2,3,40,60,50,55\n3,4,50,55,60,45\n4,1,60,45,30,50\n";
    fx.manifest = R"x({
      "tables":[{"name":"N","path":"n.csv","keys":[["id"]]},
                {"name":"Eprime","path":"eprime.csv"}],
      "constraints":[
        {"name":"C1","src":{"table":"Eprime","attrs":["s"]},"dst":{"table":"N","attrs":["id"]}},
        {"name":"C2","src":{"table":"Eprime","attrs":["t"]},"dst":{"table":"N","attrs":["id"]}}]
    })x";
    fx.spec = R"x({
      "width": 800, "height": 600,
      "views": [
        {"name":"VN","table":"N","mark":"point",
         "encodings":{"x":{"field":"age"},"y":{"field":"sal"}}},
        {"name":"VEp","table":"Eprime","mark":"link",
         "encodings":{"x1":{"field":"age1"},"y1":{"field":"sal1"},
                      "x2":{"field":"age2"},"y2":{"field":"sal2"}}}
      ]
    })x";
    return fx;
}

// A relationship table rendered as labels that spell out both endpoint keys;
// its own references stay intact via nesting and a shared scale.
Fixture label_explicit(bool full_text) {
    Fixture fx;
    fx.name = full_text ? "label-explicit" : "label-explicit-broken";
    fx.expect_faithful = full_text;
    fx.files["t.csv"] = "id,a,b\n1,12,40\n2,55,72\n3,80,20\n4,30,90\n";
    fx.files["s.csv"] = "id,name\n1,one\n2,two\n3,three\n";
    fx.files["crel.csv"] = "id,sid,tid\n0,1,1\n1,2,2\n2,3,3\n";
    fx.manifest = R"x({
      "tables":[{"name":"T","path":"t.csv","keys":[["id"]]},
                {"name":"S","path":"s.csv","keys":[["id"]]},
                {"name":"Crel","path":"crel.csv","keys":[["id"]]}],
      "constraints":[
        {"name":"C","src":{"table":"S","attrs":["id"]},"dst":{"table":"T","attrs":["id"]}},
        {"name":"D1","src":{"table":"Crel","attrs":["sid"]},"dst":{"table":"S","attrs":["id"]}},
        {"name":"D2","src":{"table":"Crel","attrs":["tid"]},"dst":{"table":"T","attrs":["id"]}}]
    })x";
    std::string text = full_text ? "format('{sid}={tid}')" : "format('{tid}')";
    fx.spec = std::string(R"x({
      "width": 800, "height": 600,
      "scales": {"st":{"type":"linear"}},
      "views": [
        {"name":"VT","table":"T","mark":"label",
         "encodings":{"x":{"field":"id","scale":"st"},"y":{"field":"b"},
                      "text":{"expr":"format('{id}')"}}},
        {"name":"VS","table":"S","mark":"label",
         "encodings":{"x":{"const":0},"y":{"field":"id"},
                      "text":{"field":"name"},"w":{"const":120},"h":{"const":40}}},
        {"name":"VC","table":"Crel","mark":"text",
         "encodings":{"x":{"field":"tid","scale":"st"},"y":{"const":2},
                      "fontSize":{"const":9},
                      "text":{"expr":")x") + text + R"x("}}}
      ],
      "nests":[{"child":"VC","parent":"VS","using":"D1"}]
    })x";
    return fx;
}

Fixture hive_housing() {
    Fixture fx;
    fx.name = "hive-housing";
    fx.files["housing.csv"] =
        "city,type,price,bdrms\n"
        "nyc,house,90,4\nnyc,condo,60,2\nnyc,house,70,3\nnyc,studio,30,1\n"
        "sf,house,120,5\nsf,condo,80,2\nsf,house,100,3\n"
        "boston,house,50,3\nboston,condo,40,2\n";
    fx.manifest = R"x({"tables":[{"name":"housing","path":"housing.csv"}]})x";
    fx.files["program.hive"] =
        "sHier(/,$city,$type);        sLayout(/,SQ,SQ);\n"
        "sSize(/,$price,$bdrms);      sColor(/,_,$bdrms)\n";
    // spec and prep are generated by compile_hive at run time
    return fx;
}

// Database catalog rendered as an entity-relationship diagram: table boxes
// placed by a force layout, column labels nested inside, links between
// foreign-key columns.
Fixture er_diagram() {
    Fixture fx;
    fx.name = "er-diagram";
    fx.files["tables.csv"] = "id,table_name\n1,users\n2,posts\n3,follows\n";
    fx.files["columns.csv"] =
        "id,tid,colname,is_key,type,ord_pos\n"
        "1,1,id,true,int,1\n2,1,username,false,text,2\n"
        "3,2,pid,true,int,1\n4,2,uid,false,int,2\n5,2,text,false,text,3\n"
        "6,3,uid,true,int,1\n7,3,fid,true,int,2\n";
    fx.files["fkeys.csv"] =
        "id,tid1,col1,tid2,col2\n1,2,uid,1,id\n2,3,uid,1,id\n3,3,fid,1,id\n";
    fx.manifest = R"x({
      "tables":[{"name":"Tables","path":"tables.csv","keys":[["id"]]},
                {"name":"Columns","path":"columns.csv","keys":[["id"],["tid","colname"]]},
                {"name":"FKeys","path":"fkeys.csv","keys":[["id"]]}],
      "constraints":[
        {"name":"CT","src":{"table":"Columns","attrs":["tid"]},"dst":{"table":"Tables","attrs":["id"]}},
        {"name":"CF1","src":{"table":"FKeys","attrs":["tid1","col1"]},
         "dst":{"table":"Columns","attrs":["tid","colname"]}},
        {"name":"CF2","src":{"table":"FKeys","attrs":["tid2","col2"]},
         "dst":{"table":"Columns","attrs":["tid","colname"]}}]
    })x";
    fx.spec = R"x({
      "width": 800, "height": 600,
      "layouts": {"fd":{"algo":"force","edges":{"table":"FKeys","src":"tid1","dst":"tid2"},
                        "seed":11,"iterations":200}},
      "views": [
        {"name":"VT","table":"Tables","mark":"rect",
         "encodings":{
           "x":{"layout":"fd","channels":["x","y"]},
           "w":{"ref":{"view":"VC","filter":["id"],"agg":{"op":"max","over":"w + 8"}}},
           "h":{"ref":{"view":"VC","filter":["id"],"agg":{"op":"sum","over":"h + 2"}}},
           "fill":{"const":"white"},"stroke":{"const":"black"}}},
        {"name":"VC","table":"Columns","mark":"label",
         "encodings":{
           "x":{"const":4},"y":{"field":"ord_pos"},
           "fontSize":{"const":10},
           "text":{"expr":"format('{colname} {type}')"},
           "textDecoration":{"expr":"iif(is_key, 'underline', 'none')"}}},
        {"name":"VL","table":"Tables","mark":"label",
         "encodings":{
           "text":{"field":"table_name"},
           "fontSize":{"const":11},
           "x":{"ref":{"view":"VT","filter":["id"],"props":{"x":"x"}}},
           "y":{"ref":{"view":"VT","filter":["id"],"props":{"y":"y - 14"}}}}},
        {"name":"VF","table":"FKeys","mark":"link",
         "encodings":{
           "x1":{"ref":{"view":"VC","filter":["tid1","col1"],"props":{"x1":"x","y1":"y"}}},
           "x2":{"ref":{"view":"VC","filter":["tid2","col2"],"props":{"x2":"x","y2":"y"}}},
           "stroke":{"const":"#777777"}}}
      ],
      "nests":[{"child":"VC","parent":"VT","using":"CT"}]
    })x";
    return fx;
}

// Heatmap of a grouped table with a scatterplot and a fitted label nested in
// each cell; selection is an ordinary projected predicate.
Fixture case_heatmap_scatter() {
    Fixture fx;
    fx.name = "case-heatmap-scatter";
    std::string rows;
    // deterministic synthetic patients over cp in {0,1}, slope in {1,2}
    const int age[] = {41, 46, 51, 56, 61, 66};
    const int rate[] = {140, 112, 168, 126, 182, 154};
    int chol = 180;
    for (int cp = 0; cp <= 1; ++cp)
        for (int slope = 1; slope <= 2; ++slope)
            for (int i = 0; i < 6; ++i) {
                int a = age[i] + cp;
                int r = rate[i] + slope;
                chol = 180 + ((chol + 37) % 120);
                rows += std::to_string(a) + "," + std::to_string(r) + "," + std::to_string(cp) +
                        "," + std::to_string(slope) + "," + std::to_string(chol) + "," +
                        std::to_string((i + cp) % 2) + "," + std::to_string(i % 2) + "\n";
            }
    fx.files["heart.csv"] = "age,thalach,cp,slope,chol,target,sex\n" + rows;
    fx.manifest = R"x({
      "tables":[{"name":"T","path":"heart.csv"}],
      "prep":{"steps":[
        {"op":"groupby","table":"T","as":"T2","keys":["cp","slope"],
         "aggs":[{"op":"count","as":"n"}]},
        {"op":"select","table":"T","as":"T4",
         "projections":[["*","*"],["sel","chol > 230"]]},
        {"op":"drop","table":"T"}
      ]}
    })x";
    fx.spec = R"x({
      "width": 800, "height": 600,
      "layouts": {"eq":{"algo":"EQ","cols":2}},
      "views": [
        {"name":"Vs","table":"T2","mark":"rect",
         "encodings":{
           "x":{"layout":"eq","channels":["x","y","w","h"]},
           "stroke":{"field":"n"},"strokeWidth":{"const":10},"fill":{"const":"none"}}},
        {"name":"Vt","table":"T2","mark":"label",
         "encodings":{
           "x":{"const":14},"y":{"const":14},
           "text":{"expr":"format('Chest: {cp} Stress: {slope}')"},
           "fontSize":{"ref":{"view":"Vs","filter":["cp","slope"],
                              "agg":{"op":"min","over":"h / 18"}}}}},
        {"name":"Vd","table":"T4","mark":"point",
         "encodings":{"x":{"field":"age"},"y":{"field":"thalach"},
                      "symbol":{"field":"target"},"color":{"field":"sel"}}}
      ],
      "nests":[
        {"child":"Vt","parent":"Vs","using":[["cp","cp"],["slope","slope"]]},
        {"child":"Vd","parent":"Vs","using":[["cp","cp"],["slope","slope"]]}
      ]
    })x";
    return fx;
}

// Parallel coordinates: every attribute normalized into its own table, one
// invisible slice per axis hosting its labels, consecutive attribute pairs
// linked per group with count-scaled strokes.
Fixture case_parallel_coords() {
    Fixture fx;
    fx.name = "case-parallel-coords";
    fx.files["heart.csv"] =
        "sex,age,chol\n"
        "m,40,190\nf,40,250\nm,55,210\nf,55,190\nm,70,250\nf,70,230\n"
        "m,40,230\nf,55,250\nm,70,190\n";
    fx.files["attrs.csv"] = "attr\nsex\nage\nchol\n";
    fx.manifest = R"x({
      "tables":[{"name":"T","path":"heart.csv"},
                {"name":"Tattrs","path":"attrs.csv"}],
      "prep":{"steps":[
        {"op":"normalize","table":"T","attrs":["sex"],"dim":"Sex","fact":"T1"},
        {"op":"normalize","table":"T1","attrs":["age"],"dim":"Age","fact":"T2"},
        {"op":"normalize","table":"T2","attrs":["chol"],"dim":"Chol","fact":"TF"},
        {"op":"groupby","table":"TF","as":"G1","keys":["Sex_id","Age_id"],
         "aggs":[{"op":"count","as":"c"}]},
        {"op":"groupby","table":"TF","as":"G2","keys":["Age_id","Chol_id"],
         "aggs":[{"op":"count","as":"c"}]},
        {"op":"drop","table":"T"},
        {"op":"drop","table":"T1"},
        {"op":"drop","table":"T2"},
        {"op":"drop","table":"TF"}
      ]}
    })x";
    fx.spec = R"x({
      "width": 900, "height": 600,
      "layouts": {"vt":{"algo":"VT","weight":1}},
      "views": [
        {"name":"Vatt","table":"Tattrs","mark":"rect",
         "encodings":{"x":{"layout":"vt","channels":["x","y","w","h"]},
                      "stroke":{"const":"#cccccc"},"fill":{"const":"none"}}},
        {"name":"VLsex","table":"Sex","mark":"label",
         "encodings":{"x":{"const":10},"y":{"field":"sex"},"text":{"field":"sex"}}},
        {"name":"VLage","table":"Age","mark":"label",
         "encodings":{"x":{"const":10},"y":{"field":"age"},"text":{"field":"age"}}},
        {"name":"VLchol","table":"Chol","mark":"label",
         "encodings":{"x":{"const":10},"y":{"field":"chol"},"text":{"field":"chol"}}},
        {"name":"VK1","table":"G1","mark":"link",
         "encodings":{
           "x1":{"ref":{"view":"VLsex","filter":["Sex_id"],
                        "props":{"x1":"x + w","y1":"y + h / 2"}}},
           "x2":{"ref":{"view":"VLage","filter":["Age_id"],
                        "props":{"x2":"x","y2":"y + h / 2"}}},
           "strokeWidth":{"field":"c"},"curve":{"const":true}}},
        {"name":"VK2","table":"G2","mark":"link",
         "encodings":{
           "x1":{"ref":{"view":"VLage","filter":["Age_id"],
                        "props":{"x1":"x + w","y1":"y + h / 2"}}},
           "x2":{"ref":{"view":"VLchol","filter":["Chol_id"],
                        "props":{"x2":"x","y2":"y + h / 2"}}},
           "strokeWidth":{"field":"c"},"curve":{"const":true}}}
      ],
      "nests":[{"children":["VLsex","VLage","VLchol"],"parent":"Vatt",
                "by":{"attr":"attr",
                      "map":{"sex":"VLsex","age":"VLage","chol":"VLchol"}}}]
    })x";
    return fx;
}

std::vector<Fixture> build_fixtures() {
    std::vector<Fixture> out;
    out.push_back(gallery_scatter());
    out.push_back(gallery_punchcard());
    out.push_back(gallery_parallel_coords());
    out.push_back(gallery_small_multiples(true));
    out.push_back(gallery_categorical(true));
    out.push_back(gallery_table());
    out.push_back(nodelink(true));
    out.push_back(nodelink_broken());
    out.push_back(nodelink(false));
    out.push_back(label_explicit(true));
    out.push_back(label_explicit(false));
    out.push_back(gallery_categorical(false));
    out.push_back(gallery_small_multiples(false));
    out.push_back(hive_housing());
    out.push_back(er_diagram());
    out.push_back(case_heatmap_scatter());
    out.push_back(case_parallel_coords());
    return out;
}

} // namespace

const std::vector<Fixture>& all_fixtures() {
    static const std::vector<Fixture> fixtures = build_fixtures();
    return fixtures;
}

const Fixture& fixture(const std::string& name) {
    for (const auto& fx : all_fixtures())
        if (fx.name == name) return fx;
    throw Error("unknown fixture '" + name + "'");
}

std::vector<std::string> list_fixtures() {
    std::vector<std::string> names;
    for (const auto& fx : all_fixtures()) names.push_back(fx.name);
    return names;
}

FixtureRun run_fixture(const std::string& name) { return run_fixture(fixture(name)); }

FixtureRun run_fixture(const Fixture& fx) {
    FixtureRun run;
    TransformPlan prep;
    if (fx.name == "hive-housing") {
        Manifest manifest = Manifest::parse(fx.manifest);
        run.base = load_database(manifest, [&](const std::string& path) {
            return fx.files.at(path);
        });
        HiveProgram prog = parse_hive(fx.files.at("program.hive"));
        HiveCompilation hive = compile_hive(prog, "housing", run.base);
        run.spec = hive.spec;
        prep = hive.plan;
    } else {
        Manifest manifest = Manifest::parse(fx.manifest);
        run.base = load_database(manifest, [&](const std::string& path) {
            return fx.files.at(path);
        });
        run.spec = parse_spec(fx.spec);
        if (manifest.prep) prep = *manifest.prep;
    }
    run.graph = compile(run.spec, run.base, &prep);
    run.result = execute(run.graph, run.base);
    run.report = check_faithfulness(run.result.prepared, run.spec, run.result);
    run.marks_json = marks_to_json(run.result);
    run.svg = render_svg(build_scene(run.result, run.spec));
    return run;
}

void export_fixtures(const std::string& dir) {
    namespace fs = std::filesystem;
    for (const auto& fx : all_fixtures()) {
        fs::path base = fs::path(dir) / fx.name;
        fs::create_directories(base);
        auto write = [&](const fs::path& p, const std::string& content) {
            std::ofstream out(p, std::ios::binary);
            if (!out) throw Error("cannot write " + p.string());
            out << content;
        };
        write(base / "manifest.json", fx.manifest);
        for (const auto& [path, content] : fx.files) write(base / path, content);
        if (!fx.spec.empty()) write(base / "spec.dvl.json", fx.spec);
    }
}

} // namespace dvl
