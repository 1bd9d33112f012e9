//! Seeded generator of short children's stories, used as the bundled corpus.
//!
//! Output is lowercase with punctuation split into separate tokens, so whitespace
//! tokenization recovers words directly. Slot fillers are drawn with Zipf-like weights,
//! which gives the heavy-tailed token frequencies of natural text.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const GIRLS: &[&str] = &[
    "lily", "mia", "sue", "anna", "emma", "lucy", "sara", "amy", "zoe", "ella", "rose", "kate", "jane", "ruby",
    "maya", "nora", "ivy", "grace", "hannah", "julia", "clara", "alice", "molly", "daisy", "sophie", "chloe",
    "olivia", "bella", "lena", "tina", "nina", "rita", "wendy", "polly", "holly", "penny",
];

const BOYS: &[&str] = &[
    "tom", "ben", "max", "sam", "tim", "jack", "leo", "finn", "noah", "luke", "jake", "alex", "bob", "dan",
    "eli", "owen", "ryan", "adam", "theo", "oscar", "henry", "oliver", "charlie", "george", "billy", "jimmy",
    "peter", "paul", "mark", "nick", "hugo", "ollie", "felix", "toby", "ethan", "kevin",
];

const ANIMALS: &[&str] = &[
    "dog", "cat", "bird", "fish", "bunny", "bear", "duck", "frog", "mouse", "horse", "cow", "pig", "sheep",
    "goat", "lion", "tiger", "monkey", "elephant", "giraffe", "zebra", "fox", "wolf", "owl", "bee", "ant",
    "butterfly", "snail", "turtle", "squirrel", "deer", "rabbit", "puppy", "kitten", "chick", "hen", "goose",
    "swan", "whale", "dolphin", "shark", "crab", "octopus", "snake", "lizard", "spider", "ladybug", "worm",
    "parrot", "penguin", "seal", "kangaroo", "koala", "panda", "camel", "donkey", "pony", "dragon", "dinosaur",
    "bat", "beaver", "hedgehog", "raccoon", "otter", "moose", "eagle", "robin", "crow", "pigeon", "hamster",
    "lamb",
];

const FOODS: &[&str] = &[
    "apple", "banana", "cake", "cookie", "bread", "cheese", "milk", "juice", "soup", "pie", "candy", "carrot",
    "orange", "grape", "pear", "peach", "cherry", "berry", "lemon", "melon", "pizza", "sandwich", "egg",
    "honey", "jam", "rice", "noodle", "pasta", "salad", "corn", "potato", "tomato", "bean", "pea", "nut",
    "muffin", "cupcake", "donut", "pancake", "waffle", "cereal", "yogurt", "butter", "sugar", "chocolate",
    "icecream", "popcorn", "pretzel", "cracker", "toast", "plum", "mango", "kiwi", "coconut", "pumpkin",
    "broccoli", "spinach", "onion", "cucumber", "lettuce", "sausage", "chicken", "fishcake", "biscuit",
    "lollipop", "gum", "tea", "water", "lemonade", "smoothie",
];

const THINGS: &[&str] = &[
    "ball", "toy", "doll", "kite", "box", "book", "hat", "car", "boat", "train", "truck", "plane", "bike",
    "drum", "flute", "bell", "block", "puzzle", "robot", "teddy", "balloon", "crayon", "pencil", "paper",
    "picture", "stone", "stick", "leaf", "flower", "shell", "feather", "key", "door", "window", "chair",
    "table", "bed", "lamp", "cup", "plate", "bowl", "spoon", "fork", "basket", "bag", "bucket", "shovel",
    "rope", "swing", "slide", "wagon", "sled", "umbrella", "clock", "mirror", "brush", "comb", "soap",
    "towel", "blanket", "pillow", "rug", "map", "coin", "ring", "necklace", "crown", "wand", "sword", "shield",
    "jar", "bottle", "candle", "gift", "card", "letter", "note", "song", "story", "game", "rock", "seed",
    "nest", "web", "tent", "ladder", "fence", "gate", "bridge", "tower", "castle", "sandcastle", "snowman",
    "star", "heart",
];

const PLACES: &[&str] = &[
    "park", "house", "garden", "forest", "beach", "school", "farm", "zoo", "shop", "market", "library",
    "playground", "pond", "lake", "river", "hill", "mountain", "field", "yard", "kitchen", "bedroom",
    "bathroom", "attic", "basement", "barn", "cave", "island", "village", "town", "city", "street", "road",
    "camp", "jungle", "desert", "ocean", "sea", "sky", "meadow", "valley", "bakery", "hospital", "museum",
    "station", "airport", "harbor", "palace", "tree house", "backyard", "classroom", "treehouse", "church",
];

const COLORS: &[&str] = &[
    "red", "blue", "green", "yellow", "pink", "purple", "orange", "white", "black", "brown", "gray", "gold",
    "silver", "shiny",
];

const ADJECTIVES: &[&str] = &[
    "big", "small", "little", "tiny", "huge", "tall", "short", "long", "old", "new", "young", "pretty",
    "beautiful", "ugly", "nice", "kind", "mean", "funny", "silly", "smart", "brave", "strong", "weak", "fast",
    "slow", "loud", "quiet", "soft", "hard", "warm", "cold", "hot", "wet", "dry", "clean", "dirty", "bright",
    "dark", "sweet", "sour", "yummy", "round", "square", "heavy", "light", "fluffy", "furry", "spotted",
    "striped", "sparkly", "magic", "special", "strange", "gentle", "wild", "busy", "lazy", "clever", "shy",
    "friendly", "curious", "careful", "messy", "neat", "empty", "full", "sharp", "smooth", "rough", "sticky",
    "noisy", "fancy", "plain", "broken", "golden", "wooden", "tall", "deep", "wide", "narrow",
];

const FEELINGS: &[&str] = &[
    "happy", "sad", "angry", "scared", "excited", "tired", "hungry", "thirsty", "sleepy", "proud", "lonely",
    "worried", "surprised", "calm", "glad", "upset", "bored", "nervous", "grateful", "cheerful", "jealous",
    "sorry", "shocked", "confused", "hopeful", "joyful", "grumpy", "afraid", "eager", "relieved",
];

/// (base, third person, past, present participle)
const VERBS: &[(&str, &str, &str, &str)] = &[
    ("play", "plays", "played", "playing"),
    ("jump", "jumps", "jumped", "jumping"),
    ("run", "runs", "ran", "running"),
    ("walk", "walks", "walked", "walking"),
    ("sing", "sings", "sang", "singing"),
    ("dance", "dances", "danced", "dancing"),
    ("read", "reads", "read", "reading"),
    ("draw", "draws", "drew", "drawing"),
    ("paint", "paints", "painted", "painting"),
    ("build", "builds", "built", "building"),
    ("find", "finds", "found", "finding"),
    ("share", "shares", "shared", "sharing"),
    ("help", "helps", "helped", "helping"),
    ("hug", "hugs", "hugged", "hugging"),
    ("kick", "kicks", "kicked", "kicking"),
    ("throw", "throws", "threw", "throwing"),
    ("catch", "catches", "caught", "catching"),
    ("climb", "climbs", "climbed", "climbing"),
    ("swim", "swims", "swam", "swimming"),
    ("fly", "flies", "flew", "flying"),
    ("eat", "eats", "ate", "eating"),
    ("drink", "drinks", "drank", "drinking"),
    ("cook", "cooks", "cooked", "cooking"),
    ("bake", "bakes", "baked", "baking"),
    ("wash", "washes", "washed", "washing"),
    ("clean", "cleans", "cleaned", "cleaning"),
    ("fix", "fixes", "fixed", "fixing"),
    ("open", "opens", "opened", "opening"),
    ("close", "closes", "closed", "closing"),
    ("push", "pushes", "pushed", "pushing"),
    ("pull", "pulls", "pulled", "pulling"),
    ("carry", "carries", "carried", "carrying"),
    ("hold", "holds", "held", "holding"),
    ("give", "gives", "gave", "giving"),
    ("take", "takes", "took", "taking"),
    ("make", "makes", "made", "making"),
    ("see", "sees", "saw", "seeing"),
    ("look", "looks", "looked", "looking"),
    ("watch", "watches", "watched", "watching"),
    ("hear", "hears", "heard", "hearing"),
    ("listen", "listens", "listened", "listening"),
    ("smell", "smells", "smelled", "smelling"),
    ("touch", "touches", "touched", "touching"),
    ("feel", "feels", "felt", "feeling"),
    ("think", "thinks", "thought", "thinking"),
    ("know", "knows", "knew", "knowing"),
    ("learn", "learns", "learned", "learning"),
    ("teach", "teaches", "taught", "teaching"),
    ("write", "writes", "wrote", "writing"),
    ("count", "counts", "counted", "counting"),
    ("laugh", "laughs", "laughed", "laughing"),
    ("smile", "smiles", "smiled", "smiling"),
    ("cry", "cries", "cried", "crying"),
    ("shout", "shouts", "shouted", "shouting"),
    ("whisper", "whispers", "whispered", "whispering"),
    ("sleep", "sleeps", "slept", "sleeping"),
    ("rest", "rests", "rested", "resting"),
    ("wake", "wakes", "woke", "waking"),
    ("hide", "hides", "hid", "hiding"),
    ("seek", "seeks", "sought", "seeking"),
    ("search", "searches", "searched", "searching"),
    ("explore", "explores", "explored", "exploring"),
    ("visit", "visits", "visited", "visiting"),
    ("travel", "travels", "traveled", "traveling"),
    ("ride", "rides", "rode", "riding"),
    ("drive", "drives", "drove", "driving"),
    ("sail", "sails", "sailed", "sailing"),
    ("dig", "digs", "dug", "digging"),
    ("plant", "plants", "planted", "planting"),
    ("grow", "grows", "grew", "growing"),
    ("pick", "picks", "picked", "picking"),
    ("buy", "buys", "bought", "buying"),
    ("sell", "sells", "sold", "selling"),
    ("bring", "brings", "brought", "bringing"),
    ("send", "sends", "sent", "sending"),
    ("call", "calls", "called", "calling"),
    ("ask", "asks", "asked", "asking"),
    ("answer", "answers", "answered", "answering"),
    ("tell", "tells", "told", "telling"),
    ("say", "says", "said", "saying"),
    ("try", "tries", "tried", "trying"),
    ("wait", "waits", "waited", "waiting"),
    ("stop", "stops", "stopped", "stopping"),
    ("start", "starts", "started", "starting"),
    ("finish", "finishes", "finished", "finishing"),
    ("win", "wins", "won", "winning"),
    ("lose", "loses", "lost", "losing"),
    ("break", "breaks", "broke", "breaking"),
    ("drop", "drops", "dropped", "dropping"),
    ("fall", "falls", "fell", "falling"),
    ("roll", "rolls", "rolled", "rolling"),
    ("spin", "spins", "spun", "spinning"),
    ("bounce", "bounces", "bounced", "bouncing"),
    ("splash", "splashes", "splashed", "splashing"),
    ("chase", "chases", "chased", "chasing"),
    ("follow", "follows", "followed", "following"),
    ("lead", "leads", "led", "leading"),
    ("save", "saves", "saved", "saving"),
    ("protect", "protects", "protected", "protecting"),
    ("love", "loves", "loved", "loving"),
    ("like", "likes", "liked", "liking"),
    ("want", "wants", "wanted", "wanting"),
    ("need", "needs", "needed", "needing"),
    ("wish", "wishes", "wished", "wishing"),
    ("hope", "hopes", "hoped", "hoping"),
    ("remember", "remembers", "remembered", "remembering"),
    ("forget", "forgets", "forgot", "forgetting"),
    ("wrap", "wraps", "wrapped", "wrapping"),
    ("tie", "ties", "tied", "tying"),
    ("cut", "cuts", "cut", "cutting"),
    ("fold", "folds", "folded", "folding"),
    ("mix", "mixes", "mixed", "mixing"),
    ("pour", "pours", "poured", "pouring"),
    ("fill", "fills", "filled", "filling"),
    ("taste", "tastes", "tasted", "tasting"),
];

const FAMILY: &[&str] = &[
    "mom", "dad", "sister", "brother", "grandma", "grandpa", "aunt", "uncle", "cousin", "friend", "teacher",
    "neighbor", "baby", "family", "mother", "father", "nanny", "buddy",
];

const BODY: &[&str] = &[
    "hand", "foot", "head", "nose", "ear", "eye", "mouth", "arm", "leg", "knee", "finger", "toe", "tail",
    "wing", "paw", "tummy", "back", "hair", "face", "tooth", "elbow", "chin", "cheek", "neck", "shoulder",
];

const WEATHER: &[&str] = &[
    "sun", "rain", "snow", "wind", "cloud", "storm", "fog", "rainbow", "thunder", "lightning", "weather",
    "puddle", "ice", "frost", "breeze",
];

const TIMES: &[&str] = &[
    "morning", "afternoon", "evening", "night", "day", "week", "summer", "winter", "spring", "autumn",
    "birthday", "holiday", "weekend", "monday", "friday", "sunday", "month", "year", "noon", "bedtime",
];

const NUMBERS: &[&str] = &[
    "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten", "many", "few", "some",
];

const ADVERBS: &[&str] = &[
    "quickly", "slowly", "happily", "sadly", "carefully", "quietly", "loudly", "gently", "together", "again",
    "always", "never", "often", "soon", "later", "today", "outside", "inside", "everywhere", "finally",
    "suddenly", "softly", "bravely", "kindly", "proudly", "safely", "nicely", "very", "really", "almost",
];

const NATURE: &[&str] = &[
    "tree", "grass", "bush", "rock", "sand", "mud", "hole", "path", "flowerbed", "pebble", "log", "branch",
    "root", "moon", "sunshine", "wave", "shore", "waterfall", "stream", "cliff", "mushroom", "acorn", "pine",
    "daisy", "tulip", "rose", "vine", "petal", "dirt", "hay",
];

const CLOTHES: &[&str] = &[
    "shirt", "dress", "coat", "scarf", "boots", "shoes", "socks", "mittens", "gloves", "jacket", "skirt",
    "pants", "sweater", "cap", "bow", "belt", "cape", "pajamas", "apron", "helmet", "glasses", "raincoat",
];

const VEHICLES: &[&str] = &[
    "bus", "taxi", "tractor", "rocket", "ship", "canoe", "scooter", "helicopter", "firetruck", "ambulance",
    "van", "jeep", "submarine", "balloon ride", "carriage", "skateboard",
];

const JOBS: &[&str] = &[
    "doctor", "nurse", "farmer", "baker", "cook", "driver", "pilot", "sailor", "king", "queen", "prince",
    "princess", "wizard", "witch", "fairy", "giant", "pirate", "knight", "clown", "painter", "singer",
    "dancer", "firefighter", "police", "mailman", "vet", "dentist", "builder", "gardener", "fisherman",
];

struct Pools {
    rng: ChaCha8Rng,
    weights: std::collections::HashMap<usize, WeightedIndex<f64>>,
}

impl Pools {
    fn pick<'a>(&mut self, list: &'a [&'a str]) -> &'a str {
        let len = list.len();
        let dist = self.weights.entry(len).or_insert_with(|| {
            WeightedIndex::new((0..len).map(|i| 1.0 / (i as f64 + 1.0).powf(0.9))).expect("positive weights")
        });
        list[dist.sample(&mut self.rng)]
    }

    fn pick_verb(&mut self) -> (&'static str, &'static str, &'static str, &'static str) {
        let len = VERBS.len();
        let dist = self.weights.entry(len).or_insert_with(|| {
            WeightedIndex::new((0..len).map(|i| 1.0 / (i as f64 + 1.0).powf(0.9))).expect("positive weights")
        });
        VERBS[dist.sample(&mut self.rng)]
    }

    fn chance(&mut self, p: f64) -> bool {
        self.rng.random::<f64>() < p
    }

    fn below(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }
}

struct Hero {
    name: &'static str,
    he: &'static str,
    his: &'static str,
    him: &'static str,
}

fn hero(pools: &mut Pools) -> Hero {
    if pools.chance(0.5) {
        Hero {
            name: pools.pick(GIRLS),
            he: "she",
            his: "her",
            him: "her",
        }
    } else {
        Hero {
            name: pools.pick(BOYS),
            he: "he",
            his: "his",
            him: "him",
        }
    }
}

fn article(word: &str) -> &'static str {
    if word.starts_with(['a', 'e', 'i', 'o', 'u']) {
        "an"
    } else {
        "a"
    }
}

fn sentence(p: &mut Pools, h: &Hero, friend: &Hero) -> String {
    let n = h.name;
    match p.below(24) {
        0 => {
            let adj = p.pick(ADJECTIVES);
            let animal = p.pick(ANIMALS);
            format!("{n} saw {} {adj} {animal} near the {} .", article(adj), p.pick(NATURE))
        }
        1 => format!("{n} lived in a {} {} with {} {} .", p.pick(ADJECTIVES), p.pick(PLACES), h.his, p.pick(FAMILY)),
        2 => {
            let v = p.pick_verb();
            format!("every {} , {n} {} the {} {} .", p.pick(TIMES), v.1, p.pick(COLORS), p.pick(THINGS))
        }
        3 => format!("one day , {n} went to the {} to {} .", p.pick(PLACES), p.pick_verb().0),
        4 => format!("the {} was {} and {} .", p.pick(ANIMALS), p.pick(ADJECTIVES), p.pick(FEELINGS)),
        5 => format!("\" can i {} your {} ? \" asked {n} .", p.pick_verb().0, p.pick(THINGS)),
        6 => format!("\" yes , you can {} it , \" said the {} .", p.pick_verb().0, p.pick(JOBS)),
        7 => format!("{n} felt {} because the {} was so {} .", p.pick(FEELINGS), p.pick(WEATHER), p.pick(ADJECTIVES)),
        8 => format!("{n} and {} {} {} in the {} .", friend.name, p.pick_verb().2, p.pick(ADVERBS), p.pick(PLACES)),
        9 => format!("they ate some {} and {} {} .", p.pick(FOODS), p.pick(FOODS), p.pick(ADVERBS)),
        10 => format!("{n} was {} with a {} {} when the {} came .", p.pick_verb().3, p.pick(ADJECTIVES), p.pick(THINGS), p.pick(VEHICLES)),
        11 => format!("{} {} gave {} a {} {} .", h.his, p.pick(FAMILY), h.him, p.pick(COLORS), p.pick(CLOTHES)),
        12 => format!("{n} hurt {} {} , but {} did not cry .", h.his, p.pick(BODY), h.he),
        13 => format!("at the end of the {} , {n} was very {} .", p.pick(TIMES), p.pick(FEELINGS)),
        14 => format!("the {} said , \" you must always {} {} . \"", p.pick(JOBS), p.pick_verb().0, p.pick(ADVERBS)),
        15 => format!("{n} learned to {} the {} with {} {} .", p.pick_verb().0, p.pick(THINGS), h.his, p.pick(BODY)),
        16 => format!("it was a {} {} and the {} looked {} .", p.pick(ADJECTIVES), p.pick(TIMES), p.pick(NATURE), p.pick(COLORS)),
        17 => format!("{n} wanted to {} , but the {} was too {} .", p.pick_verb().0, p.pick(THINGS), p.pick(ADJECTIVES)),
        18 => format!("{} and {} {} the {} together .", n, friend.name, p.pick_verb().2, p.pick(FOODS)),
        19 => format!("{} {} and {} {} the {} {} .", h.he, p.pick_verb().2, friend.he, p.pick_verb().2, p.pick(ADJECTIVES), p.pick(ANIMALS)),
        20 => format!("{} saw {} {} {} in the {} .", n, p.pick(NUMBERS), p.pick(COLORS), p.pick(ANIMALS), p.pick(PLACES)),
        21 => format!("the {} {} {} over the {} .", p.pick(ANIMALS), p.pick_verb().2, p.pick(ADVERBS), p.pick(NATURE)),
        22 => format!("{n} put on {} {} {} and went {} .", h.his, p.pick(COLORS), p.pick(CLOTHES), p.pick(ADVERBS)),
        _ => format!("the {} {} {} and {n} felt {} .", p.pick(WEATHER), p.pick_verb().2, p.pick(ADVERBS), p.pick(FEELINGS)),
    }
}

/// Generate stories until at least `target_bytes` of text exist. Stories are separated
/// by blank lines; the output is a pure function of `seed` and `target_bytes`.
pub fn generate_stories(seed: u64, target_bytes: usize) -> String {
    let mut pools = Pools {
        rng: ChaCha8Rng::seed_from_u64(seed),
        weights: Default::default(),
    };
    let mut out = String::with_capacity(target_bytes + 1024);
    while out.len() < target_bytes {
        let h = hero(&mut pools);
        let friend = hero(&mut pools);
        let adj = pools.pick(ADJECTIVES);
        let animal = pools.pick(ANIMALS);
        out.push_str(&format!(
            "once upon a time , there was {} {adj} {animal} named {} .",
            article(adj),
            h.name
        ));
        let len = 5 + pools.below(8);
        for _ in 0..len {
            out.push(' ');
            out.push_str(&sentence(&mut pools, &h, &friend));
        }
        out.push_str(" the end .\n\n");
    }
    out
}
