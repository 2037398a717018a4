#include "domseq/synthetic.hpp"

#include "domseq/math.hpp"

#include <array>
#include <map>
#include <set>

namespace domseq {

namespace {

struct Template {
    const char* query;
    const char* response;
};

constexpr int kMovies = 0;
constexpr int kGaming = 1;
constexpr int kOther = 2;

const std::vector<Template> kMovieTemplates = {
    {"have you seen {movie}", "yes i watched it at the cinema last year"},
    {"what did you think of {movie}", "the acting in that film was brilliant"},
    {"is {movie} a good movie", "it is a classic film with a great cast"},
    {"i just watched {movie} at the cinema", "nice the big screen makes films better"},
    {"who directed {movie}", "a famous director with many oscar awards"},
    {"what is your favorite movie", "i love classic films with a clever plot"},
    {"do you like horror movies", "horror films are too scary for me"},
    {"do you like watching movies", "i am a big fan of films"},
    {"who is your favorite actor", "i admire actors who play villains"},
    {"the x men movies are good", "i thought the superhero films were fun"},
    {"do you want to watch a movie", "i would watch a film in the theater"},
    {"any good movies on netflix", "netflix has some great new documentaries"},
    {"what movie should i watch tonight", "watch a romantic comedy film tonight"},
    {"did you see the new movie trailer", "the trailer looks like a blockbuster"},
    {"are sequels ever better than the original film", "some sequels beat the original movie"},
    {"who won the oscar for best picture", "a quiet drama film won the oscar"},
    {"do you prefer comedy or drama movies", "i prefer comedy films with witty dialogue"},
    {"the soundtrack of {movie} is amazing", "film scores make movie scenes emotional"},
    {"what do you think of the director of {movie}", "the director has a unique cinematic style"},
    {"i love the popcorn at the cinema", "cinema popcorn is the best part of movies"},
    {"is the book better than the movie", "the book usually has more detail than the film"},
    {"what genre of films do you like", "i enjoy science fiction films the most"},
    {"do you watch animated movies", "animated films are great for all ages"},
    {"which actress do you like", "i like actresses with strong dramatic roles"},
    {"have you been to a film festival", "film festivals show great independent movies"},
    {"the special effects in {movie} were great", "the visual effects team did stunning work"},
    {"do you rewatch old movies", "i rewatch classic black and white films"},
    {"what was the last movie you saw", "i saw a thriller at the cinema"},
    {"do you read movie reviews", "critic reviews help me choose films"},
    {"should i see {movie} in theaters", "yes the theater screen is worth it"},
    {"who plays the lead in {movie}", "a famous actor plays the lead role"},
    {"documentaries or blockbuster movies", "documentaries are my favorite kind of film"},
};

const std::vector<Template> kGamingTemplates = {
    {"have you played {game}", "yes i finished it on my console"},
    {"is {game} a good game", "it is a great game with fun levels"},
    {"what is your favorite video game", "i love open world role playing games"},
    {"what games interest you", "i enjoy strategy games and shooters"},
    {"do you play on xbox or playstation", "i play on playstation with a controller"},
    {"i just beat the final boss in {game}", "nice that boss fight is hard"},
    {"any tips for {game}", "level up your character before the boss"},
    {"do you like multiplayer games", "online multiplayer matches are so much fun"},
    {"which console should i buy", "the new console has great exclusive games"},
    {"i love playing {game} with friends", "coop gaming with friends is the best"},
    {"do you play games on steam", "steam sales are great for pc gamers"},
    {"are you good at first person shooters", "my aim in shooters is decent"},
    {"what rpg should i play next", "try a fantasy rpg with a long quest"},
    {"the graphics in {game} are amazing", "the game engine renders stunning graphics"},
    {"do you play mobile games", "mobile games are fun on the bus"},
    {"what do you think of nintendo", "nintendo makes the most creative games"},
    {"how many hours have you played {game}", "i have played it for hundreds of hours"},
    {"do you watch esports tournaments", "esports finals are exciting to watch"},
    {"is the new {game} update good", "the patch fixed many gameplay bugs"},
    {"do you prefer pc or console gaming", "pc gaming with a keyboard is my choice"},
    {"what is the hardest level in {game}", "the final dungeon level is the hardest"},
    {"do you collect game achievements", "i hunt every trophy and achievement"},
    {"have you tried virtual reality games", "vr games make me feel inside the game"},
    {"who is the best game streamer", "streamers who play speedruns are the best"},
    {"is {game} worth buying", "yes the game is worth the price"},
    {"do you like retro arcade games", "arcade classics are still fun to play"},
    {"what gaming controller do you use", "i use a wireless gamepad controller"},
    {"should i play {game} on hard mode", "hard mode makes the game more rewarding"},
    {"i keep losing ranked matches", "practice in casual matches before ranked"},
    {"what game genre do you like", "i like puzzle games and platformers"},
    {"do you play indie games", "indie games have creative gameplay ideas"},
    {"my character died in {game}", "respawn and try the level again"},
};

const std::vector<Template> kOtherTemplates = {
    {"hi how are you", "hello i am doing well thanks"},
    {"good morning", "good morning to you too"},
    {"what is the weather like today", "it is sunny and warm outside"},
    {"do you like {food}", "yes i enjoy that dish a lot"},
    {"what did you eat for lunch", "i had a sandwich and some fruit"},
    {"how was your weekend", "my weekend was relaxing with family"},
    {"where do you live", "i live in a small town by the sea"},
    {"do you have any pets", "i have a dog and a cat"},
    {"what time is it", "it is almost noon"},
    {"i am tired from work", "take a break and get some rest"},
    {"what is your favorite food", "i love homemade pasta with tomato sauce"},
    {"do you like to travel", "i love traveling to new countries"},
    {"how is your family", "my family is healthy and happy"},
    {"i want to cook {food} for dinner", "cooking at home is healthy and cheap"},
    {"can you recommend a restaurant", "the italian restaurant downtown is great"},
    {"do you exercise", "i go jogging every morning"},
    {"what music do you like", "i listen to jazz and classical music"},
    {"are you a robot", "i am just a friendly chat partner"},
    {"tell me a joke", "why did the chicken cross the road"},
    {"it is raining a lot", "bring an umbrella when you go out"},
    {"do you drink coffee", "i drink coffee every morning"},
    {"what are your hobbies", "i like gardening and hiking"},
    {"happy birthday", "thank you so much for the wishes"},
    {"i am going to the beach", "enjoy the sun and the waves"},
    {"how old are you", "age is just a number for me"},
    {"thanks for the chat", "you are welcome have a nice day"},
    {"what is your name", "people call me chatbot"},
    {"i need to buy groceries", "make a shopping list before you go"},
    {"do you like the summer weather", "summer is my favorite season"},
    {"is {city} a nice city to visit", "yes the city has lovely parks and museums"},
    {"my dog is sick", "i hope your dog gets better soon"},
    {"good night", "good night and sleep well"},
};

struct AmbiguousTemplate {
    const char* query;
    std::array<const char*, 3> responses;  // movies, gaming, other
};

const std::vector<AmbiguousTemplate> kAmbiguous = {
    {"want to play tonight",
     {"sure lets watch a film at the cinema", "yes lets play some online matches",
      "sorry i am busy with work tonight"}},
    {"what do you think about it",
     {"the plot was clever and the acting superb", "the gameplay is smooth and the levels are fun",
      "i think it is nice and relaxing"}},
    {"have you tried the new one",
     {"not yet but the trailer looks amazing", "yes the new update has great graphics",
      "yes the new cafe downtown is lovely"}},
    {"which one is your favorite",
     {"the first film of the trilogy", "the open world adventure with dragons",
      "i like sunny days the most"}},
    {"is it worth the money",
     {"yes the ticket price is fair for that film", "yes the game is worth every coin",
      "yes it is a good deal"}},
    {"tell me more about that",
     {"the director used amazing camera shots", "the boss fights get harder each level",
      "well my weekend was calm and quiet"}},
    {"who is your favorite character",
     {"the villain played by that famous actor", "the hero with the sword and shield",
      "my grandmother is a real character"}},
    {"how long is it",
     {"the movie runs about two hours", "the campaign takes about forty hours",
      "the walk takes about ten minutes"}},
    {"i could not stop thinking about it",
     {"that ending was a real cinema twist", "that final boss level was intense",
      "that happens to me after a long day"}},
    {"what should i pick next",
     {"watch a comedy film on netflix", "try a multiplayer shooter on console",
      "pick a nice book for the evening"}},
    {"did you like the ending",
     {"the film ending made me cry", "the final level ending was epic", "the party ended too early"}},
    {"let us do it again soon",
     {"sure another movie night next week", "sure another gaming session next week",
      "sure lets meet for coffee again"}},
};

const std::vector<std::string> kMovieTitles = {"inception", "titanic", "avatar",    "jaws",   "alien",
                                               "gladiator", "casablanca", "frozen", "rocky", "psycho"};
const std::vector<std::string> kGameTitles = {"halo",   "zelda", "minecraft", "tetris", "fortnite",
                                              "skyrim", "doom",  "pacman",    "overwatch", "portal"};
const std::vector<std::string> kFoods = {"pizza", "sushi", "tacos", "curry", "pancakes", "salad", "soup", "burgers"};
const std::vector<std::string> kCities = {"paris", "london", "tokyo", "rome", "berlin", "sydney"};

const std::vector<Template>& keyword_templates(int domain) {
    switch (domain) {
        case kMovies: return kMovieTemplates;
        case kGaming: return kGamingTemplates;
        default: return kOtherTemplates;
    }
}

std::string fill_slots(std::string text, Rng& rng) {
    const std::pair<const char*, const std::vector<std::string>*> slots[] = {
        {"{movie}", &kMovieTitles}, {"{game}", &kGameTitles}, {"{food}", &kFoods}, {"{city}", &kCities}};
    for (const auto& [slot, fillers] : slots) {
        const std::string key(slot);
        for (auto pos = text.find(key); pos != std::string::npos; pos = text.find(key))
            text.replace(pos, key.size(), rng.pick(*fillers));
    }
    return text;
}

}  // namespace

const std::vector<std::string>& ambiguous_queries() {
    static const std::vector<std::string> queries = [] {
        std::vector<std::string> q;
        for (const auto& t : kAmbiguous) q.emplace_back(t.query);
        return q;
    }();
    return queries;
}

bool is_ambiguous_query(const std::string& raw) {
    for (const auto& q : ambiguous_queries())
        if (q == raw) return true;
    return false;
}

SyntheticCorpus generate_synthetic_corpus(const SyntheticOptions& options) {
    if (options.switch_prob < 0 || options.switch_prob > 1) throw Error("switch_prob must be in [0, 1]");
    if (options.min_user_turns < 1 || options.max_user_turns < options.min_user_turns)
        throw Error("invalid turn range");

    SyntheticCorpus corpus;
    corpus.domains = DomainSet::standard();
    const int k = corpus.domains.size();
    Rng rng(options.seed);

    for (int c = 0; c < options.n_conversations; ++c) {
        Conversation conv;
        conv.id = "synth-" + std::to_string(c);
        const int n_turns = options.min_user_turns +
                            static_cast<int>(rng.below(static_cast<std::size_t>(
                                options.max_user_turns - options.min_user_turns + 1)));
        int domain = static_cast<int>(rng.below(static_cast<std::size_t>(k)));
        for (int t = 0; t < n_turns; ++t) {
            bool switched = false;
            if (t > 0 && rng.bernoulli(options.switch_prob)) {
                domain = (domain + 1 + static_cast<int>(rng.below(static_cast<std::size_t>(k - 1)))) % k;
                switched = true;
            }
            std::string query;
            std::string response;
            if (t > 0 && !switched && rng.bernoulli(options.ambiguous_rate)) {
                const auto& a = rng.pick(kAmbiguous);
                query = a.query;
                response = a.responses[static_cast<std::size_t>(domain)];
            } else {
                const auto& tpl = rng.pick(keyword_templates(domain));
                query = fill_slots(tpl.query, rng);
                response = tpl.response;
            }
            conv.turns.push_back(Utterance::make(std::move(query), "user", domain));
            conv.turns.push_back(Utterance::make(std::move(response), "bot", domain));
        }
        corpus.conversations.push_back(std::move(conv));
    }
    corpus.pairs = extract_qr_pairs(corpus.conversations);
    return corpus;
}

std::vector<std::pair<std::string, std::vector<std::string>>> synthetic_seed_keywords() {
    std::vector<std::string> movies = {"movie", "movies", "film", "films", "cinema", "actor", "director",
                                       "oscar", "netflix", "trailer", "theater", "comedy"};
    std::vector<std::string> gaming = {"game", "games", "gaming", "console", "level", "boss", "playstation",
                                       "xbox", "multiplayer", "rpg", "controller", "steam"};
    std::vector<std::string> other = {"weather", "food", "family", "weekend", "coffee", "dog",
                                      "morning", "dinner", "work", "travel"};
    movies.insert(movies.end(), kMovieTitles.begin(), kMovieTitles.end());
    gaming.insert(gaming.end(), kGameTitles.begin(), kGameTitles.end());
    other.insert(other.end(), kFoods.begin(), kFoods.end());
    return {{"movies", movies}, {"gaming", gaming}, {"out_of_domain", other}};
}

EmbeddingTable synthetic_embeddings(const SyntheticCorpus& corpus, int dim, std::uint64_t seed) {
    const int k = corpus.domains.size();
    std::map<std::string, std::vector<int>> counts;
    for (const auto& c : corpus.conversations)
        for (const auto& u : c.turns) {
            if (!u.gold_domain) continue;
            for (const auto& tok : u.tokens) {
                auto& v = counts[tok];
                v.resize(static_cast<std::size_t>(k));
                ++v[static_cast<std::size_t>(*u.gold_domain)];
            }
        }

    Rng rng(seed);
    auto random_unit = [&] {
        Vector v(dim);
        rng.fill_uniform(v, 1.0);
        return Vector(v.normalized());
    };
    std::vector<Vector> axes;  // one per domain plus a shared axis
    for (int d = 0; d <= k; ++d) axes.push_back(random_unit());

    EmbeddingTable table(dim);
    for (const auto& [tok, per_domain] : counts) {
        int total = 0;
        int best = 0;
        for (int d = 0; d < k; ++d) {
            total += per_domain[static_cast<std::size_t>(d)];
            if (per_domain[static_cast<std::size_t>(d)] > per_domain[static_cast<std::size_t>(best)]) best = d;
        }
        const bool owned = per_domain[static_cast<std::size_t>(best)] >= 0.8 * total;
        const Vector& axis = axes[static_cast<std::size_t>(owned ? best : k)];
        table.set(tok, axis + 0.8 * random_unit());
    }
    return table;
}

}  // namespace domseq
