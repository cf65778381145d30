#include "topicfuse/corpus.hpp"

#include <numeric>

#include "topicfuse/errors.hpp"
#include "topicfuse/rng.hpp"

namespace topicfuse {

const std::array<std::vector<std::string>, kTopicCount>& trigger_sentences() {
  static const std::array<std::vector<std::string>, kTopicCount> pools = {{
      // 0 Agent Communication
      {"i could not understand the agent on the phone",
       "the representative mumbled and i missed half of it",
       "hard to understand what the rep was trying to say"},
      // 1 Agent Knowledge and Resolution Speed
      {"the agent could not answer my questions about the form",
       "i was given wrong information about the renewal date",
       "it took forever to get an answer from them"},
      // 2 Offshore Agents
      {"i was routed to an offshore call centre again",
       "the overseas agent handled my enquiry"},
      // 3 Agent Service Attitude
      {"the agent was extremely rude to me on the call",
       "such a bad attitude from the staff",
       "the representative sounded dismissive about my situation"},
      // 4 Agent Service Quality
      {"i received terrible customer service yesterday",
       "the overall service quality has gone downhill",
       "excellent service from start to finish"},
      // 5 Application Authentication
      {"i keep getting locked out of the mobile app",
       "the app rejects my sign in every morning"},
      // 6 Application Interface/Navigation
      {"the app menu is impossible to work with",
       "navigating the mobile app takes far too many taps",
       "the app is confusing to move around in"},
      // 7 Audio Quality/Connection
      {"i could barely hear the agent through all the noise",
       "the call dropped twice while we spoke",
       "there was an echo on the line the entire time"},
      // 8 Call Transfer
      {"i was transferred to four departments before anyone helped",
       "i got bounced around between teams"},
      // 9 Called Multiple Times
      {"i have called multiple times about the same invoice",
       "this is the third time i have called about this"},
      // 10 IVR
      {"the phone menu made me press one for everything",
       "i got stuck in the automated system loop"},
      // 11 Call Lack of follow-up
      {"nobody followed up after my enquiry last month",
       "they promised to call me back and never did",
       "i never heard back about the quote"},
      // 12 Language Barrier
      {"there was a clear language barrier on the call",
       "the agent had such a thick accent i had to ask twice"},
      // 13 Unable to resolve issue
      {"my issue is still not resolved after two visits",
       "they could not fix the billing error i reported",
       "the problem came back the very next day"},
      // 14 Claims Online Submission
      {"i could not submit my claim online",
       "the online claim form would not accept my receipts",
       "uploading my claim documents online failed for me"},
      // 15 Claims Process
      {"my claim is taking too long to process",
       "the claim has been stuck for weeks now"},
      // 16 Claims Result
      {"my claim was denied without a clear reason",
       "they rejected my claim even though everything was documented"},
      // 17 Claims Status/Decision
      {"i am calling to check the status of my claim",
       "my claim is still pending after three weeks"},
      // 18 Claims Payment/Reimbursement
      {"i am still waiting for the reimbursement of my expenses",
       "the claim payment never arrived in my account"},
      // 19 Product Coverage/Policy
      {"i want to understand my coverage before the trip",
       "is this procedure covered under my policy",
       "the dental work was not covered apparently"},
      // 20 Portal Authentication
      {"i am locked out of the member portal since monday",
       "cannot access my online account even with the right details",
       "the website sign in keeps failing for me"},
      // 21 Portal Computer Literacy
      {"i am not very good with computers at my age",
       "we are not that comfortable with technology in this house"},
      // 22 Portal Ease of use
      {"the website is very easy to use for quotes",
       "the portal was frustrating to use when renewing",
       "using the website is hard for a first timer"},
      // 23 Portal Information
      {"i could not find the information about deductibles on the website",
       "there is not enough information about fees on the site"},
      // 24 Portal Interface/Navigation
      {"the website layout buries the renewal button",
       "navigating the portal takes patience i do not have",
       "the site is cluttered beyond belief"},
      // 25 Portal Password
      {"i need to reset my password again",
       "the passcode you sent never worked"},
      // 26 Portal Stability/Loading Time
      {"the website keeps crashing when i upload documents",
       "the page took forever to load this morning",
       "the portal was down for the whole weekend"},
  }};
  return pools;
}

const std::array<std::vector<std::string>, kTopicCount>& paraphrase_sentences() {
  static const std::array<std::vector<std::string>, kTopicCount> pools = {{
      // 0 Agent Communication: cue "garbled"
      {"everything the phone staff told me came out garbled",
       "the explanations used so much jargon the meaning was garbled for me",
       "half the words from the operator were garbled noise to me"},
      // 1 Agent Knowledge and Resolution Speed: cue "expertise", "homework"
      {"the person helping me clearly had not done their homework on my file",
       "i expected more expertise from the team on basic policy questions",
       "they guessed their way through my enquiry without any real expertise"},
      // 2 Offshore Agents: cue "time zone", "halfway around the world"
      {"i reached a centre halfway around the world at three in the morning their time",
       "the support desk sits in a distant time zone from mine"},
      // 3 Agent Service Attitude: cue "talked down", "eye rolling"
      {"i felt talked down to during the whole exchange",
       "you could practically sense the eye rolling over the phone",
       "the tone i got made me feel like a burden"},
      // 4 Agent Service Quality: cue "bar", "white glove"
      {"the experience fell well below the bar i expect from this company",
       "nothing about the interaction resembled the white glove treatment advertised"},
      // 5 Application Authentication: cue "fingerprint", "face id"
      {"the fingerprint unlock on my phone never recognizes me anymore",
       "face id quit working so i am stuck on the first screen of my phone"},
      // 6 Application Interface/Navigation: cue "buried", "taps"
      {"the feature i need is buried five taps deep on my phone",
       "using it on mobile requires thumb gymnastics to reach anything"},
      // 7 Audio Quality/Connection: cue "tin can", "vanished"
      {"it sounded like they were talking through a tin can underwater",
       "every other word vanished somewhere between us during the conversation"},
      // 8 Call Transfer: cue "hot potato", "relay race"
      {"my enquiry was treated like a hot potato nobody wanted to keep",
       "getting help felt like a relay race across three different desks"},
      // 9 Called Multiple Times: cue "broken record", "fifth conversation"
      {"i feel like a broken record repeating my story to you every week",
       "this must be my fifth conversation with you about the same invoice"},
      // 10 IVR: cue "robot", "maze"
      {"the robot voice maze took ten minutes before a human picked up",
       "i had to argue with a recording before reaching a real person"},
      // 11 Call Lack of follow-up: cue "radio silence", "vanished into a void"
      {"after the first conversation there was radio silence from your side",
       "my request seems to have vanished into a void over the past month"},
      // 12 Language Barrier: cue "translator", "tongue"
      {"i wished for a translator halfway through our talk",
       "we simply did not share a common first tongue and it showed"},
      // 13 Unable to resolve issue: cue "square one", "band aid"
      {"i am right back at square one with the billing error",
       "every attempt so far has been a band aid that peels off by morning"},
      // 14 Claims Online Submission: cue "paperwork", "digital route"
      {"i gave up and sent the paperwork for my claim through the post instead",
       "the digital route for sending in my claim never cooperated with me"},
      // 15 Claims Process: cue "snail", "queue"
      {"my claim paperwork moves at a snail pace through your queue",
       "weeks keep passing while my claim folder sits untouched in a queue"},
      // 16 Claims Result: cue "thumbs down", "flat no"
      {"the final word on my claim was a flat no",
       "they gave my claim a thumbs down in the end"},
      // 17 Claims Status/Decision: cue "limbo", "crystal ball"
      {"my claim sits in limbo and nobody can tell me where it stands",
       "i need a crystal ball to learn where my claim currently sits"},
      // 18 Claims Payment/Reimbursement: cue "wallet", "owed"
      {"the money you owe me from march has yet to reach my wallet",
       "i am still owed the amount for my hospital visit"},
      // 19 Product Coverage/Policy: cue "fine print", "umbrella"
      {"the fine print about what my plan includes is impossible to parse",
       "nobody could say whether the umbrella of my plan reaches dental work"},
      // 20 Portal Authentication: cue "front door", "key never turns"
      {"the digital front door will not let me through no matter what i type",
       "i stand outside my account area and the key never turns"},
      // 21 Portal Computer Literacy: cue "grandchildren", "paper person"
      {"my grandchildren usually handle anything online for me",
       "i am a paper person and these screens all look alike to me"},
      // 22 Portal Ease of use: cue "instruction manual", "puzzle"
      {"renewing online felt like assembling furniture without the instruction manual",
       "every basic task on that screen turns into a small puzzle"},
      // 23 Portal Information: cue "scavenger hunt", "breadcrumbs"
      {"locating the fee schedule felt like a scavenger hunt with no map",
       "what i needed was hidden behind breadcrumbs nobody would guess"},
      // 24 Portal Interface/Navigation: cue "labyrinth", "signposts"
      {"the online member area is a labyrinth without signposts",
       "i wandered from tab to tab like a tourist without a street map"},
      // 25 Portal Password: cue "secret phrase", "combination"
      {"the secret phrase for getting in never sticks in my memory",
       "i cycle through every combination i know and none opens my session"},
      // 26 Portal Stability/Loading Time: cue "spinning wheel", "hourglass"
      {"i watched the spinning wheel long enough to brew a pot of coffee",
       "the hourglass icon and i have become close friends this week"},
  }};
  return pools;
}

const std::vector<std::string>& background_sentences() {
  static const std::vector<std::string> pool = {
      "the branch office closed earlier than the posted hours on friday",
      "please add more parking near the downtown location",
      "my renewal notice arrived two weeks late in the mail",
      "the premium went up this year without much explanation",
      "the waiting room at the clinic you partner with was spotless",
      "i appreciated the birthday card your team mailed me",
      "the new television advertisement has a catchy tune",
      "your newsletter recipes are a delight every month",
      "the envelope was sturdy and the documents arrived unbent",
      "office chairs in the lobby could use replacing",
      "the holiday schedule posted on the door was accurate",
      "the pens you hand out at events write smoothly",
      "my neighbour recommended your firm after the hail storm",
      "the invoice numbering changed format and puzzled my bookkeeper",
      "the font on the letters is easier to read than last year",
      "the lobby coffee machine makes a surprisingly decent espresso",
  };
  return pool;
}

const std::vector<std::string>& filler_sentences() {
  static const std::vector<std::string> pool = {
      "thanks for taking the time to read this",
      "i have been a member since 2011",
      "this happened on a tuesday afternoon",
      "my reference number is 48213",
      "i hope this reaches the right team",
      "overall the rest was unremarkable",
      "please pass this along to whoever handles it",
      "the weather made everything slower that day",
      "i rarely write in but this felt worth mentioning",
      "we switched to you from a competitor two years ago",
  };
  return pool;
}

const std::array<int, kTopicCount>& topic_weights() {
  static const std::array<int, kTopicCount> weights = {
      28, 47, 7,  65, 53, 25, 17, 27, 26, 31, 10, 24, 22, 29,
      22, 29, 34, 27, 27, 20, 47, 2,  41, 27, 38, 39, 29};
  return weights;
}

namespace {

int weighted_topic(Rng& rng, int total_weight) {
  auto r = static_cast<int>(rng.below(static_cast<std::uint64_t>(total_weight)));
  const auto& weights = topic_weights();
  for (int t = 0; t < kTopicCount; ++t) {
    r -= weights[static_cast<std::size_t>(t)];
    if (r < 0) return t;
  }
  return kTopicCount - 1;
}

const std::string& pick(Rng& rng, const std::vector<std::string>& pool) {
  return pool[static_cast<std::size_t>(rng.below(pool.size()))];
}

void require_frac(const char* name, double value) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw Error(ErrorKind::ParseError,
                std::string(name) + " must be in [0, 1], got " + std::to_string(value));
  }
}

}  // namespace

std::vector<LabeledSample> generate_corpus(const CorpusConfig& cfg) {
  if (cfg.n < 1) {
    throw Error(ErrorKind::ParseError, "corpus size must be >= 1, got " +
                                           std::to_string(cfg.n));
  }
  require_frac("paraphrase_frac", cfg.paraphrase_frac);
  require_frac("background_frac", cfg.background_frac);
  require_frac("multi_topic_frac", cfg.multi_topic_frac);

  const auto& weights = topic_weights();
  const int total_weight = std::accumulate(weights.begin(), weights.end(), 0);

  Rng rng(cfg.seed);
  std::vector<LabeledSample> out;
  out.reserve(static_cast<std::size_t>(cfg.n));
  for (int i = 0; i < cfg.n; ++i) {
    LabeledSample s;
    s.doc_id = "synth-" + std::to_string(i);

    if (rng.uniform() < cfg.background_frac) {
      s.text = pick(rng, background_sentences());
      if (rng.uniform() < 0.25) s.text += ". " + pick(rng, background_sentences());
      out.push_back(std::move(s));
      continue;
    }

    const bool paraphrase = rng.uniform() < cfg.paraphrase_frac;
    const bool multi = rng.uniform() < cfg.multi_topic_frac;
    std::vector<int> topics = {weighted_topic(rng, total_weight)};
    if (multi) {
      int second = topics[0];
      while (second == topics[0]) second = weighted_topic(rng, total_weight);
      topics.push_back(second);
    }

    std::vector<std::string> parts;
    if (rng.uniform() < 0.5) parts.push_back(pick(rng, filler_sentences()));
    for (int t : topics) {
      const auto& pools = paraphrase ? paraphrase_sentences() : trigger_sentences();
      parts.push_back(pick(rng, pools[static_cast<std::size_t>(t)]));
      s.labels.push_back(topic_names()[static_cast<std::size_t>(t)]);
    }
    if (rng.uniform() < 0.3) parts.push_back(pick(rng, filler_sentences()));

    s.text = parts[0];
    for (std::size_t p = 1; p < parts.size(); ++p) s.text += ". " + parts[p];
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace topicfuse
