#include "groundkit/engine.hpp"

#include <string_view>
#include <unordered_set>

namespace groundkit::engine {
namespace {

// Function words and high-frequency non-content words. Caption chunking
// treats these as phrase boundaries; everything else is a content word.
const std::unordered_set<std::string_view>& closed_class_words() {
    static const std::unordered_set<std::string_view> kWords = {
        // determiners and quantifiers
        "a", "an", "the", "this", "that", "these", "those", "each", "every",
        "either", "neither", "some", "any", "no", "all", "both", "half",
        "several", "many", "much", "few", "little", "more", "most", "less",
        "least", "other", "another", "such", "what", "which", "whose",
        "enough", "certain", "various", "own", "same",

        // pronouns
        "i", "me", "my", "mine", "myself", "we", "us", "our", "ours",
        "ourselves", "you", "your", "yours", "yourself", "yourselves", "he",
        "him", "his", "himself", "she", "her", "hers", "herself", "it",
        "its", "itself", "they", "them", "their", "theirs", "themselves",
        "who", "whom", "whoever", "whomever", "someone", "somebody",
        "something", "anyone", "anybody", "anything", "everyone",
        "everybody", "everything", "nobody", "nothing", "one", "ones",
        "oneself", "none",

        // prepositions
        "about", "above", "across", "after", "against", "along",
        "alongside", "amid", "among", "amongst", "around", "as", "at",
        "atop", "before", "behind", "below", "beneath", "beside", "besides",
        "between", "beyond", "by", "despite", "down", "during", "except",
        "for", "from", "in", "inside", "into", "like", "near", "nearby",
        "of", "off", "on", "onto", "opposite", "out", "outside", "over",
        "past", "per", "regarding", "since", "through", "throughout",
        "till", "to", "toward", "towards", "under", "underneath", "until",
        "unto", "up", "upon", "via", "with", "within", "without",

        // conjunctions and clause markers
        "and", "but", "or", "nor", "so", "yet", "although", "though",
        "because", "if", "unless", "while", "whereas", "whether", "once",
        "when", "whenever", "where", "wherever", "why", "how", "than",
        "lest", "nonetheless", "nevertheless", "however", "therefore",
        "thus", "moreover", "furthermore", "meanwhile", "instead",

        // auxiliaries, copulas, modals
        "am", "is", "are", "was", "were", "be", "been", "being", "do",
        "does", "did", "doing", "done", "have", "has", "had", "having",
        "will", "would", "shall", "should", "can", "could", "may", "might",
        "must", "ought", "need", "needs", "dare",

        // high-frequency verbs seen in captions, with inflections
        "appear", "appears", "appearing", "appeared", "become", "becomes",
        "becoming", "begin", "begins", "beginning", "bend", "bends",
        "bending", "carry", "carries", "carrying", "carried", "catch",
        "catches", "catching", "chase", "chases", "chasing", "chased",
        "come", "comes", "coming", "contain",
        "contains", "containing", "cover", "covers", "covering", "covered",
        "cross", "crosses", "crossing", "depict", "depicts", "depicting",
        "depicted", "display", "displays", "displaying", "displayed",
        "drive", "drives", "driving", "eat", "eats", "eating", "enjoy",
        "enjoys", "enjoying", "face", "faces", "facing", "fall", "falls",
        "falling", "feature", "features", "featuring", "featured", "fly",
        "flies", "flying", "follow", "follows", "following", "get", "gets",
        "getting", "give", "gives", "giving", "given", "go", "goes",
        "going", "grab", "grabs", "grabbing", "graze", "grazes", "grazing",
        "hang", "hangs", "hanging", "happen", "happens", "happening",
        "hold", "holds", "holding", "held", "jump", "jumps", "jumping",
        "keep", "keeps", "keeping", "kneel", "kneels", "kneeling", "lay",
        "lays", "laying", "lean", "leans", "leaning", "leap", "leaps",
        "leaping", "lie", "lies", "lying", "look", "looks", "looking",
        "make", "makes", "making", "move", "moves", "moving", "paddle",
        "paddles", "paddling", "park", "parks", "parking", "parked",
        "pass", "passes", "passing", "perch", "perches", "perching",
        "perched", "place", "places", "placing", "placed", "play", "plays",
        "playing", "point", "points", "pointing", "pose", "poses",
        "posing", "prepare", "prepares", "preparing", "pull", "pulls",
        "pulling", "push", "pushes", "pushing", "reach", "reaches",
        "reaching", "remain", "remains", "remaining", "rest", "rests",
        "resting", "ride", "rides", "riding", "ridden", "rise", "rises",
        "rising", "run", "runs", "running", "seem", "seems", "seeming",
        "show", "shows", "showing", "shown", "sit", "sits", "sitting",
        "skate", "skates", "skating", "ski", "skis", "skiing", "sleep",
        "sleeps", "sleeping", "smile", "smiles", "smiling", "stand",
        "stands", "standing", "stay", "stays", "staying", "step", "steps",
        "stepping", "stretch", "stretches", "stretching", "surf", "surfs",
        "surfing", "swim", "swims", "swimming", "take", "takes", "taking",
        "taken", "talk", "talks", "talking", "throw", "throws", "throwing",
        "touch", "touches", "touching", "travel", "travels", "traveling",
        "try", "tries", "trying", "turn", "turns", "turning", "use",
        "uses", "using", "used", "walk", "walks", "walking", "watch",
        "watches", "watching", "wear", "wears", "wearing", "worn", "work",
        "works", "working",

        // adverbs and other non-content words
        "also", "again", "almost", "already", "always", "away", "back",
        "barely", "even", "ever", "far", "here", "just", "merely", "never",
        "nearly", "not", "now", "often", "only", "quite", "rather",
        "really", "soon", "still", "then", "there", "too", "together",
        "truly", "usually", "very", "well", "maybe", "perhaps", "apart",
        "forward", "backward", "indeed", "alone", "somewhat", "slightly",
        "directly", "closely", "clearly", "partially", "partly", "fully",
        "mostly", "currently", "possibly",

        // numerals and counting words
        "zero", "two", "three", "four", "five", "six", "seven", "eight",
        "nine", "ten", "eleven", "twelve", "thirteen", "fourteen",
        "fifteen", "sixteen", "seventeen", "eighteen", "nineteen", "twenty",
        "thirty", "forty", "fifty", "sixty", "seventy", "eighty", "ninety",
        "hundred", "thousand", "first", "second", "third", "fourth",
        "fifth", "sixth", "seventh", "eighth", "ninth", "tenth", "dozen",
        "couple", "single", "twice",

        // contraction fragments left by tokenization ("it's" -> "it", "s")
        "s", "t", "re", "ve", "ll", "d", "m",
    };
    return kWords;
}

} // namespace

bool is_closed_class_word(const std::string& lowercase_word) {
    return closed_class_words().count(lowercase_word) > 0;
}

} // namespace groundkit::engine
