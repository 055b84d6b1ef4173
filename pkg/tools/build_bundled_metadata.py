"""Generate the bundled ILSVRC-restricted hierarchy metadata and the
built-in protocol spec files.

The emitted files mirror the publicly distributed metadata shapes
(``is_a.txt``, ``words.txt``, ``ilsvrc_synsets.txt``) but cover only the
subgraph reachable from the 1000 ILSVRC leaf synsets, in the pruned
single-parent form produced by the hierarchy parse the protocols were
derived with (that parse drops e.g. the greyhound breeds from the dog
subtree, giving the 116-dog / 61-hunting-dog class counts). Leaf ids and
names are the canonical ILSVRC 2012 table; intermediate nodes outside
the documented protocol roots are a best-effort reconstruction, which is
sufficient because consumers query leaf sets under protocol roots only.

Run from the repository root:

    python3 tools/build_bundled_metadata.py
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from ilsvrc_classes import parse_classes

from osr import taxonomy as tax

OUT_METADATA = Path(__file__).parent.parent / "src" / "osr" / "data" / "metadata"
OUT_PROTOCOLS = Path(__file__).parent.parent / "src" / "osr" / "data" / "protocols"

PAIRS = parse_classes()
WNID = {name: wnid for wnid, name in PAIRS}
assert len(WNID) == 1000, "leaf names must be unique"


def leaves(*names: str) -> list[str]:
    return [WNID[n] for n in names]


def span(first: str, last: str) -> list[str]:
    """All leaves from `first` to `last` inclusive, in table order."""
    names = [name for _, name in PAIRS]
    i, j = names.index(first), names.index(last)
    assert i <= j
    return [PAIRS[k][0] for k in range(i, j + 1)]


# ---------------------------------------------------------------------------
# Hierarchy: (group wnid, display name, children). Children may be leaf
# wnids or other group wnids; every leaf gets exactly one parent.
# ---------------------------------------------------------------------------

GROUPS: list[tuple[str, str, list[str]]] = []


def group(wnid: str, name: str, children: list[str]) -> str:
    GROUPS.append((wnid, name, children))
    return wnid

# -- animals ----------------------------------------------------------------

toy_dog = group("n02085374", "toy dog", span("Chihuahua", "toy terrier"))
hound = group(
    "n02087551",
    "hound",
    span("Rhodesian ridgeback", "Irish wolfhound")
    + span("Ibizan hound", "Weimaraner"),
)
sporting_dog = group(
    "n02098550", "sporting dog", span("flat-coated retriever", "Irish water spaniel")
)
hunting_dog = group(
    "n02087122",
    "hunting dog",
    [hound, sporting_dog] + span("Staffordshire bullterrier", "Lhasa"),
)
working_dog = group("n02103406", "working dog", span("kuvasz", "Siberian husky"))
dog = group(
    "n02084071",
    "dog",
    [toy_dog, hunting_dog, working_dog] + span("dalmatian", "Mexican hairless"),
)
wolf = group("n02114100", "wolf", span("timber wolf", "coyote"))
wild_dog = group("n02115335", "wild dog", span("dingo", "African hunting dog"))
fox = group("n02118333", "fox", span("red fox", "grey fox"))
canine = group(
    "n02083346", "canine", [dog, wolf, wild_dog, fox] + leaves("hyena")
)

wildcat = group("n02124623", "wildcat", leaves("cougar", "lynx"))
cat = group("n02121620", "cat", [wildcat])
big_cat = group("n02127808", "big cat", span("leopard", "cheetah"))
feline = group("n02120997", "feline", [cat, big_cat])

bear = group("n02131653", "bear", span("brown bear", "sloth bear"))
viverrine = group("n02134971", "viverrine", leaves("mongoose", "meerkat"))
musteline = group("n02441326", "musteline mammal", span("weasel", "badger"))
procyonid = group("n02507649", "procyonid", leaves("lesser panda", "giant panda"))
carnivore = group(
    "n02075296",
    "carnivore",
    [canine, feline, bear, viverrine, musteline, procyonid],
)

ungulate = group("n02370806", "ungulate", span("sorrel", "llama"))
elephant = group("n02503517", "elephant", leaves("Indian elephant", "African elephant"))
aquatic_mammal = group("n02062017", "aquatic mammal", span("grey whale", "sea lion"))
rodent = group("n02329401", "rodent", span("hamster", "guinea pig"))
lagomorph = group("n02323449", "lagomorph", span("wood rabbit", "Angora"))
edentate = group("n02453611", "edentate", leaves("armadillo", "three-toed sloth"))
monkey = group("n02484322", "monkey", span("guenon", "squirrel monkey"))
primate = group(
    "n02469914",
    "primate",
    [monkey]
    + span("orangutan", "siamang")
    + leaves("Madagascar cat", "indri"),
)
placental = group(
    "n01886756",
    "placental",
    [
        carnivore,
        ungulate,
        elephant,
        aquatic_mammal,
        rodent,
        lagomorph,
        edentate,
        primate,
    ],
)
marsupial = group("n01874434", "marsupial", span("wallaby", "wombat"))
mammal = group(
    "n01861778",
    "mammal",
    [placental, marsupial] + leaves("tusker", "echidna", "platypus"),
)

bird = group(
    "n01503061",
    "bird",
    span("cock", "great grey owl")
    + span("black grouse", "black swan")
    + span("white stork", "albatross"),
)
fish = group(
    "n02512053",
    "fish",
    span("tench", "stingray") + span("barracouta", "puffer"),
)
amphibian = group(
    "n01627424", "amphibian", span("European fire salamander", "tailed frog")
)
reptile = group("n01661091", "reptile", span("loggerhead", "sidewinder"))
vertebrate = group(
    "n01471682", "vertebrate", [mammal, bird, fish, amphibian, reptile]
)
chordate = group("n01466257", "chordate", [vertebrate])

insect = group("n02159955", "insect", span("tiger beetle", "lycaenid"))
arachnid = group("n01769347", "arachnid", span("harvestman", "tick"))
crustacean = group("n01974773", "crustacean", span("Dungeness crab", "isopod"))
arthropod = group(
    "n01767661",
    "arthropod",
    [insect, arachnid, crustacean] + leaves("trilobite", "centipede"),
)
coelenterate = group(
    "n01909422", "coelenterate", leaves("jellyfish", "sea anemone", "brain coral")
)
worm = group("n01922303", "worm", leaves("flatworm", "nematode"))
mollusk = group("n01940736", "mollusk", span("conch", "chambered nautilus"))
echinoderm = group(
    "n02316707", "echinoderm", leaves("starfish", "sea urchin", "sea cucumber")
)
invertebrate = group(
    "n01905661",
    "invertebrate",
    [arthropod, coelenterate, worm, mollusk, echinoderm],
)

domestic_cat = group("n02121808", "domestic cat", span("tabby", "Egyptian cat"))
greyhound = group("n02090827", "greyhound", leaves("Italian greyhound", "whippet"))
domestic_animal = group(
    "n01317541", "domestic animal", [domestic_cat, greyhound]
)

animal = group(
    "n00015388", "animal", [chordate, invertebrate, domestic_animal]
)

# -- plants, fungi, people, food --------------------------------------------

fruit = group(
    "n13134947",
    "fruit",
    span("Granny Smith", "pomegranate") + leaves("acorn", "hip", "buckeye", "ear"),
)
plant = group(
    "n00017222",
    "plant",
    [fruit] + leaves("rapeseed", "daisy", "yellow lady's slipper", "corn"),
)
fungus = group("n12992868", "fungus", span("coral fungus", "bolete"))
person = group("n00007846", "person", leaves("ballplayer", "groom", "scuba diver"))

vegetable = group("n07707451", "vegetable", span("head cabbage", "mushroom"))
food = group(
    "n00021265",
    "food",
    [vegetable]
    + span("plate", "mashed potato")
    + span("hay", "eggnog"),
)

# -- artifacts ---------------------------------------------------------------

car = group(
    "n02958343",
    "car",
    leaves(
        "ambulance", "beach wagon", "cab", "convertible", "jeep",
        "limousine", "minivan", "Model T", "racer", "sports car",
    ),
)
truck = group(
    "n04490091",
    "truck",
    leaves(
        "fire engine", "garbage truck", "moving van", "pickup",
        "police van", "tow truck", "trailer truck",
    ),
)
boat = group(
    "n02858304",
    "boat",
    leaves("canoe", "fireboat", "gondola", "lifeboat", "speedboat", "yawl"),
)
ship = group(
    "n04194289",
    "ship",
    leaves(
        "aircraft carrier", "catamaran", "container ship", "liner",
        "pirate", "schooner", "submarine", "trimaran", "wreck",
    ),
)
aircraft = group(
    "n02686568",
    "aircraft",
    leaves("airliner", "airship", "balloon", "space shuttle", "warplane"),
)
train = group(
    "n04468005",
    "train",
    leaves(
        "bullet train", "electric locomotive", "freight car",
        "passenger car", "steam locomotive", "streetcar",
    ),
)
wheeled_vehicle = group(
    "n04576211",
    "wheeled vehicle",
    [car, truck]
    + leaves(
        "amphibian", "barrow", "bicycle-built-for-two", "bobsled", "dogsled",
        "forklift", "go-kart", "golfcart", "half track", "horse cart",
        "jinrikisha", "minibus", "mobile home", "moped", "motor scooter",
        "mountain bike", "oxcart", "recreational vehicle", "school bus",
        "shopping cart", "snowmobile", "snowplow", "tank", "tractor",
        "tricycle", "trolleybus", "unicycle",
    ),
)
vessel = group("n04530566", "vessel", [ship, boat])
craft = group("n03125870", "craft", [vessel, aircraft])
vehicle = group("n04524313", "vehicle", [wheeled_vehicle, craft])
conveyance = group("n03100490", "conveyance", [vehicle, train])

computer = group(
    "n03082979",
    "computer",
    leaves(
        "desktop computer", "hand-held computer", "laptop", "notebook",
        "slide rule", "web site",
    ),
)
timepiece = group(
    "n04437953",
    "timepiece",
    leaves(
        "analog clock", "digital clock", "digital watch", "hourglass",
        "stopwatch", "sundial", "wall clock",
    ),
)
instrument = group(
    "n03800933",
    "musical instrument",
    leaves(
        "accordion", "acoustic guitar", "banjo", "bassoon", "cello", "chime",
        "cornet", "drum", "electric guitar", "flute", "French horn", "gong",
        "grand piano", "harmonica", "harp", "maraca", "marimba", "oboe",
        "ocarina", "organ", "panpipe", "sax", "steel drum", "trombone",
        "upright", "violin",
    ),
)
device = group(
    "n03183080",
    "device",
    [computer, timepiece, instrument]
    + leaves(
        "abacus", "ballpoint", "Band Aid", "bannister", "barbell", "barometer",
        "binoculars", "bottlecap", "buckle", "can opener", "candle",
        "car mirror", "car wheel", "carousel", "cash machine", "cassette player",
        "CD player", "cellular telephone", "chain saw", "cleaver", "coil",
        "combination lock", "computer keyboard", "corkscrew", "crane",
        "crash helmet", "crutch", "dial telephone", "dishwasher", "disk brake",
        "drumstick", "dumbbell", "electric fan", "espresso maker", "fire screen",
        "fountain pen", "gas pump", "gasmask", "guillotine", "hair slide",
        "hammer", "hand blower", "hard disc", "harvester", "hatchet",
        "hook", "iPod", "iron", "joystick", "knot", "ladle", "lawn mower",
        "lens cap", "letter opener", "lighter", "loudspeaker", "loupe",
        "magnetic compass", "matchstick", "microphone", "microwave", "modem",
        "monitor", "mouse", "mousetrap", "muzzle", "nail", "odometer",
        "oil filter", "oscilloscope", "oxygen mask", "paddle", "paddlewheel",
        "padlock", "paintbrush", "parking meter", "pay-phone",
        "pencil sharpener", "photocopier", "pick", "plane", "plow", "plunger",
        "Polaroid camera", "potter's wheel", "power drill", "printer",
        "projector", "quill", "racket", "radiator", "radio", "radio telescope",
        "reel", "reflex camera", "refrigerator", "remote control", "rotisserie",
        "rubber eraser", "rule", "safety pin", "scale", "scoreboard", "screen",
        "screw", "screwdriver", "seat belt", "sewing machine", "shovel",
        "ski", "slot", "snorkel", "soap dispenser", "solar dish", "space bar",
        "space heater", "spatula", "spindle", "spotlight", "stethoscope",
        "stove", "strainer", "stretcher", "sunglass", "sunglasses", "swab",
        "swing", "switch", "syringe", "table lamp", "tape player",
        "television", "thimble", "thresher", "toaster", "torch", "tripod",
        "typewriter keyboard", "vacuum", "vending machine", "waffle iron",
        "washer", "whistle", "wooden spoon", "cassette", "pole",
    ),
)
container_group = group(
    "n03094503",
    "container",
    leaves(
        "ashcan", "backpack", "barrel", "bathtub", "beaker", "beer bottle",
        "beer glass", "binder", "bucket", "caldron", "carton",
        "cocktail shaker", "coffee mug", "coffeepot", "crate", "Crock Pot",
        "Dutch oven", "envelope", "frying pan", "goblet", "hamper",
        "mailbag", "mailbox", "measuring cup", "milk can", "mixing bowl",
        "mortar", "packet", "pencil box", "Petri dish", "piggy bank",
        "pill bottle", "pitcher", "plastic bag", "pop bottle", "pot",
        "purse", "rain barrel", "safe", "saltshaker", "shopping basket",
        "soup bowl", "teapot", "tray", "tub", "vase", "wallet", "washbasin",
        "water bottle", "water jug", "water tower", "whiskey jug",
        "wine bottle", "wok", "carpenter's kit",
    ),
)
ball = group(
    "n02778669",
    "ball",
    leaves(
        "baseball", "basketball", "croquet ball", "golf ball",
        "ping-pong ball", "puck", "rugby ball", "soccer ball",
        "tennis ball", "volleyball",
    ),
)
furniture = group(
    "n03405725",
    "furniture",
    leaves(
        "barber chair", "bassinet", "bookcase", "chest", "chiffonier",
        "china cabinet", "cradle", "crib", "desk", "dining table",
        "entertainment center", "file", "folding chair", "four-poster",
        "medicine chest", "park bench", "pool table", "rocking chair",
        "studio couch", "throne", "wardrobe",
    ),
)
weapon = group(
    "n04565375",
    "weapon",
    leaves(
        "assault rifle", "bow", "cannon", "holster", "missile",
        "projectile", "revolver", "rifle",
    ),
)
instrumentality = group(
    "n03575240",
    "instrumentality",
    [conveyance, device, container_group, ball, furniture, weapon]
    + leaves(
        "apiary", "chain", "chain mail", "hoopskirt"
    ),
)
shop = group(
    "n03748162",
    "mercantile establishment",
    leaves(
        "bakery", "barbershop", "bookshop", "butcher shop", "confectionery",
        "grocery store", "restaurant", "shoe shop", "tobacco shop", "toyshop",
    ),
)
bridge = group(
    "n02898711",
    "bridge",
    leaves("steel arch bridge", "suspension bridge", "viaduct"),
)
structure = group(
    "n04341686",
    "structure",
    [shop, bridge]
    + leaves(
        "altar", "barn", "beacon", "bell cote", "birdhouse", "boathouse",
        "breakwater", "castle", "chainlink fence", "church", "cinema",
        "cliff dwelling", "dam", "dock", "dome", "drilling platform",
        "flagpole", "fountain", "greenhouse", "grille", "home theater",
        "honeycomb", "library", "lumbermill", "manhole cover", "maypole",
        "maze", "megalith", "monastery", "mosque", "obelisk",
        "palace", "patio", "pedestal", "picket fence", "pier", "planetarium",
        "prison", "stage", "stone wall", "stupa", "thatch", "tile roof",
        "totem pole", "triumphal arch", "turnstile", "vault", "window screen",
        "window shade", "worm fence", "yurt",
    ),
)
clothing = group(
    "n03051540",
    "clothing",
    leaves(
        "abaya", "academic gown", "apron", "bath towel", "bathing cap",
        "bearskin", "bib", "bikini", "bolo tie", "bonnet", "bow tie",
        "brass", "brassiere", "breastplate", "broom", "bulletproof vest",
        "cardigan", "Christmas stocking", "cloak", "clog",
        "cowboy boot", "cowboy hat", "cuirass", "diaper", "dishrag",
        "doormat", "face powder", "feather boa", "football helmet",
        "fur coat", "gown", "hair spray", "handkerchief", "jack-o'-lantern",
        "jean", "jersey", "jigsaw puzzle", "kimono", "knee pad", "lab coat",
        "lampshade", "lipstick", "Loafer", "lotion", "maillot",
        "maillot tank suit", "mask", "military uniform", "miniskirt",
        "mitten", "mortarboard", "mosquito net", "mountain tent",
        "neck brace", "necklace", "nipple", "overskirt", "pajama",
        "paper towel", "parachute", "perfume", "pickelhaube", "pillow",
        "pinwheel", "plate rack", "poncho", "prayer rug", "punching bag",
        "quilt", "running shoe", "sandal", "sarong", "scabbard",
        "shield", "shoji", "shower cap", "shower curtain", "ski mask",
        "sleeping bag", "sliding door", "sock", "sombrero", "stole", "suit",
        "sunscreen", "sweatshirt", "swimming trunks", "teddy",
        "theater curtain", "toilet seat", "toilet tissue", "trench coat",
        "umbrella", "velvet", "vestment", "wig", "Windsor tie", "wing",
        "wool",
    ),
)
balance_gear = group(
    "n04285146",
    "sports equipment",
    leaves("balance beam", "horizontal bar", "parallel bars"),
)
artifact = group(
    "n00021939",
    "artifact",
    [instrumentality, structure, clothing, balance_gear],
)

geological = group(
    "n09287968",
    "geological formation",
    leaves(
        "alp", "cliff", "coral reef", "geyser", "lakeside", "promontory",
        "sandbar", "seashore", "valley", "volcano",
    ),
)
natural_object = group(
    "n00019128", "natural object", [geological] + leaves("bubble", "spider web")
)

communication = group(
    "n00033020",
    "communication",
    leaves(
        "comic book", "crossword puzzle", "street sign", "traffic light",
        "book jacket", "menu",
    ),
)

organism = group("n00004475", "organism", [animal, plant, fungus, person])
living_thing = group("n00004258", "living thing", [organism])
whole = group("n00003553", "whole", [living_thing, artifact, natural_object])
obj = group("n00002684", "object", [whole])
matter = group("n00020827", "matter", [food])
physical_entity = group("n00001930", "physical entity", [obj, matter])
abstraction = group("n00002137", "abstraction", [communication])
group("n00001740", "entity", [physical_entity, abstraction])


# ---------------------------------------------------------------------------
# Built-in protocol definitions
# ---------------------------------------------------------------------------

# P2 known/negative: the hunting-dog halves, pinned as explicit id lists.
P2_KNOWN = (
    span("Rhodesian ridgeback", "Irish wolfhound")
    + span("Ibizan hound", "Weimaraner")
    + span("Staffordshire bullterrier", "Sealyham terrier")
)
P2_NEGATIVE = span("Airedale", "Lhasa") + span(
    "flat-coated retriever", "Irish water spaniel"
)
P2_UNKNOWN_ROOTS = [toy_dog, fox, wild_dog, wolf, feline, bear, musteline, ungulate]

P1_KNOWN_ROOTS = [dog]
P1_NEGATIVE_ROOTS = [
    fox, wild_dog, wolf, feline, bear, musteline, ungulate,
    rodent, lagomorph, marsupial, procyonid, viverrine, edentate, elephant,
]
P1_UNKNOWN_ROOTS = [
    furniture, instrument, car, truck, boat, computer, fruit, fungus,
    vegetable, ball, timepiece, geological, shop, ship, train, aircraft,
]

P3_ROOTS = [
    dog, bird, insect, furniture, fish, monkey, car, feline, truck,
    fruit, fungus, boat, computer,
    reptile, amphibian, ungulate, vegetable, instrument, bridge,
]
P3_TOTALS = (151, 97, 164)

EXPECTED = {
    "p1": (116, 67, 166),
    "p2": (30, 31, 55),
    "p3": (151, 97, 164),
}


def build_taxonomy() -> tax.Taxonomy:
    edge_lines = []
    name_lines = []
    for wnid, name, children in GROUPS:
        name_lines.append(f"{wnid}\t{name}")
        for child in children:
            edge_lines.append(f"{wnid} {child}")
    for wnid, name in PAIRS:
        name_lines.append(f"{wnid}\t{name}")
    is_a = "\n".join(edge_lines) + "\n"
    words = "\n".join(name_lines) + "\n"
    ilsvrc = "\n".join(w for w, _ in PAIRS) + "\n"
    return tax.parse_hierarchy(is_a, words, ilsvrc), is_a, words, ilsvrc


def apportion(sizes: list[int], totals: tuple[int, int, int]) -> list[tuple[int, int, int]]:
    """Largest-remainder split of each root's leaf count across the three
    roles so the role sums hit ``totals`` exactly."""
    grand = sum(sizes)
    assert grand == sum(totals)
    out = [[0, 0, 0] for _ in sizes]
    remaining = list(sizes)
    for role in (0, 1):  # unknown takes the leftovers per root
        quotas = [remaining[i] * totals[role] / (sum(remaining) or 1) for i in range(len(sizes))]
        base = [int(q) for q in quotas]
        short = totals[role] - sum(base)
        order = sorted(
            range(len(sizes)), key=lambda i: (quotas[i] - base[i], -i), reverse=True
        )
        for i in order[:short]:
            base[i] += 1
        for i in range(len(sizes)):
            base[i] = min(base[i], remaining[i])
        # fix any clamping shortfall deterministically
        short = totals[role] - sum(base)
        i = 0
        while short > 0:
            if base[i] < remaining[i]:
                base[i] += 1
                short -= 1
            i = (i + 1) % len(sizes)
        for i in range(len(sizes)):
            out[i][role] = base[i]
            remaining[i] -= base[i]
    for i in range(len(sizes)):
        out[i][2] = remaining[i]
    return [tuple(v) for v in out]


def main() -> None:
    taxonomy, is_a, words, ilsvrc = build_taxonomy()

    # every leaf must be reachable and appear exactly once as a child
    child_count: dict[str, int] = {}
    for _, _, children in GROUPS:
        for c in children:
            child_count[c] = child_count.get(c, 0) + 1
    multi = {c: n for c, n in child_count.items() if n > 1}
    assert not multi, f"multiply-parented nodes: {multi}"
    missing = [w for w, _ in PAIRS if w not in child_count]
    assert not missing, f"unattached leaves: {missing[:10]}"

    assert len(tax.leaf_descendants(taxonomy, "n00001740")) == 1000

    dogs = tax.leaf_descendants(taxonomy, "n02084071")
    assert len(dogs) == 116, f"dog leaves: {len(dogs)}"
    hd = tax.leaf_descendants(taxonomy, "n02087122")
    assert len(hd) == 61, f"hunting dog leaves: {len(hd)}"
    assert hd == sorted(P2_KNOWN + P2_NEGATIVE)
    assert sorted(P2_KNOWN) == hd[:30] and sorted(P2_NEGATIVE) == hd[30:]

    def union(roots):
        out = set()
        for r in roots:
            out |= set(tax.leaf_descendants(taxonomy, r))
        return sorted(out)

    p1 = (dogs, union(P1_NEGATIVE_ROOTS), union(P1_UNKNOWN_ROOTS))
    p2 = (sorted(P2_KNOWN), sorted(P2_NEGATIVE), union(P2_UNKNOWN_ROOTS))
    for name, roles in (("p1", p1), ("p2", p2)):
        got = tuple(len(r) for r in roles)
        assert got == EXPECTED[name], f"{name}: {got} != {EXPECTED[name]}"
        all_ids = [s for role in roles for s in role]
        assert len(all_ids) == len(set(all_ids)), f"{name}: roles overlap"

    p3_leafsets = [tax.leaf_descendants(taxonomy, r) for r in P3_ROOTS]
    sizes = [len(s) for s in p3_leafsets]
    assert sum(sizes) == sum(P3_TOTALS), f"p3 pool: {sum(sizes)}"
    parts = apportion(sizes, P3_TOTALS)
    p3_roles: list[list[tuple[str, str]]] = [[], [], []]
    for root, leafset, (k, n, _u) in zip(P3_ROOTS, p3_leafsets, parts):
        p3_roles[0].append((root, leafset[:k]))
        p3_roles[1].append((root, leafset[k : k + n]))
        p3_roles[2].append((root, leafset[k + n :]))
    got = tuple(sum(len(ls) for _, ls in role) for role in p3_roles)
    assert got == P3_TOTALS, f"p3: {got}"

    OUT_METADATA.mkdir(parents=True, exist_ok=True)
    OUT_PROTOCOLS.mkdir(parents=True, exist_ok=True)
    (OUT_METADATA / "is_a.txt").write_text(is_a)
    (OUT_METADATA / "words.txt").write_text(words)
    (OUT_METADATA / "ilsvrc_synsets.txt").write_text(ilsvrc)

    def spec_lines(name, expect, rows):
        lines = [
            f"# osr-protocol-spec v1 name={name}",
            f"# expect known={expect[0]} negative={expect[1]} unknown={expect[2]}",
        ]
        lines.extend(rows)
        return "\n".join(lines) + "\n"

    p1_rows = (
        [f"known {dog} all-leaves"]
        + [f"negative {r} all-leaves" for r in P1_NEGATIVE_ROOTS]
        + [f"unknown {r} all-leaves" for r in P1_UNKNOWN_ROOTS]
    )
    (OUT_PROTOCOLS / "p1.txt").write_text(
        spec_lines("p1", EXPECTED["p1"], p1_rows)
    )

    p2_rows = (
        [f"known {hunting_dog} explicit " + " ".join(sorted(P2_KNOWN))]
        + [f"negative {hunting_dog} explicit " + " ".join(sorted(P2_NEGATIVE))]
        + [f"unknown {r} all-leaves" for r in P2_UNKNOWN_ROOTS]
    )
    (OUT_PROTOCOLS / "p2.txt").write_text(
        spec_lines("p2", EXPECTED["p2"], p2_rows)
    )

    role_names = ("known", "negative", "unknown")
    p3_rows = []
    for role_name, role in zip(role_names, p3_roles):
        for root, leafset in role:
            if leafset:
                p3_rows.append(f"{role_name} {root} explicit " + " ".join(leafset))
    (OUT_PROTOCOLS / "p3.txt").write_text(
        spec_lines("p3", EXPECTED["p3"], p3_rows)
    )

    print("metadata:", OUT_METADATA)
    print("protocols:", OUT_PROTOCOLS)
    print("p1/p2/p3 class counts verified:", EXPECTED)


if __name__ == "__main__":
    main()
