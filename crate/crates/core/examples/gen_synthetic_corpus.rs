//! Regenerates the bundled synthetic corpus.
//!
//! ```text
//! cargo run -p mediascreen-core --example gen_synthetic_corpus -- data/synthetic_corpus.jsonl
//! ```
//!
//! Every sentence is invented; no text is taken from real news or posts.
//! Output is fully determined by the seed below.

use chrono::{DateTime, Duration, Utc};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mediascreen_core::corpus::{save_corpus, Document, DocumentSource, Fragment};
use mediascreen_core::textprep::{clean_document, segment_fragments};
use mediascreen_core::SentimentLabel::{self, Negative, Neutral, Positive};

const SEED: u64 = 20_240_611;
const QUOTA: [(SentimentLabel, usize); 3] = [(Negative, 90), (Neutral, 150), (Positive, 60)];

const MFS: &[&str] = &["bKash", "Nagad", "Rocket", "Upay", "SureCash"];
const MFS_BN: &[&str] = &["বিকাশ", "নগদ", "রকেট", "উপায়"];
const PLACES: &[&str] = &["Dhaka", "Chattogram", "Sylhet", "Khulna", "Rajshahi", "Barishal", "Rangpur", "Cumilla", "Gazipur", "Bogura"];
const PLACES_BN: &[&str] = &["ঢাকা", "চট্টগ্রাম", "সিলেট", "খুলনা", "রাজশাহী", "বরিশাল", "রংপুর", "কুমিল্লা"];
const MONTHS: &[&str] = &["January", "March", "May", "July", "September", "November"];
const DAYS: &[&str] = &["Sunday", "Monday", "Tuesday", "Wednesday", "Thursday"];
const DAYS_BN: &[&str] = &["রবিবার", "সোমবার", "মঙ্গলবার", "বুধবার", "বৃহস্পতিবার"];
const CRIMES: &[&str] = &["money laundering", "fraud", "illegal hundi transfers", "identity theft", "SIM swap fraud"];
const DIGITS_BN: [char; 10] = ['০', '১', '২', '৩', '৪', '৫', '৬', '৭', '৮', '৯'];

const EN: &[(SentimentLabel, &str)] = &[
    (Negative, "{mfs} agent arrested in {place} over {crime}."),
    (Negative, "Police say a gang stole Tk {amount} from {mfs} customers in {place}."),
    (Negative, "Customers lost money after a fake {mfs} call centre scam."),
    (Negative, "Investigators allege a {mfs} account was used to launder Tk {amount}."),
    (Negative, "A hundi racket moved Tk {amount} through agent accounts in {place}."),
    (Negative, "Fraudsters cheated {count} wallet users with fake prize messages."),
    (Negative, "Detectives seized cash and SIM cards from a scam den in {place}."),
    (Neutral, "{mfs} will update its app on {day}."),
    (Neutral, "The central bank published mobile banking transaction data for {month}."),
    (Neutral, "{mfs} agents in {place} open at nine in the morning."),
    (Neutral, "Transaction limits for {mfs} accounts remain unchanged in {month}."),
    (Neutral, "A seminar on digital payments was held in {place} on {day}."),
    (Neutral, "The company opened a new regional office in {place}."),
    (Neutral, "Customers can check balances by dialling the short code."),
    (Neutral, "{mfs} reported {count} thousand new accounts in {month}."),
    (Neutral, "{mfs} ran a fraud awareness campaign in {place}."),
    (Positive, "{mfs} won an award for excellent customer service."),
    (Positive, "Users praised the fast and reliable {mfs} cashback offer."),
    (Positive, "Small traders in {place} say mobile wallets made business easier and safer."),
    (Positive, "{mfs} helped flood victims in {place} receive aid quickly."),
    (Positive, "Farmers welcomed the convenient new savings scheme from {mfs}."),
    (Positive, "Police thanked {mfs} for helping catch a fraud gang."),
];

const BN: &[(SentimentLabel, &str)] = &[
    (Negative, "{place_bn} শহরে {mfs_bn} এজেন্ট প্রতারণার অভিযোগে গ্রেপ্তার।"),
    (Negative, "{mfs_bn} এজেন্টের বিরুদ্ধে অর্থ পাচারের অভিযোগ উঠেছে।"),
    (Negative, "ভুয়া কল দিয়ে গ্রাহকের {amount_bn} টাকা হাতিয়ে নিয়েছে প্রতারক চক্র।"),
    (Negative, "হুন্ডি চক্রের {count_bn} সদস্যকে আটক করেছে পুলিশ।"),
    (Negative, "{place_bn} শহরে মোবাইল ব্যাংকিং প্রতারণা বেড়েছে।"),
    (Neutral, "{mfs_bn} আগামী {day_bn} অ্যাপ হালনাগাদ করবে।"),
    (Neutral, "কেন্দ্রীয় ব্যাংক মোবাইল ব্যাংকিং লেনদেনের তথ্য প্রকাশ করেছে।"),
    (Neutral, "{place_bn} শহরে নতুন শাখা অফিস চালু হয়েছে।"),
    (Neutral, "গ্রাহকরা শর্ট কোড ডায়াল করে ব্যালেন্স দেখতে পারবেন।"),
    (Neutral, "লেনদেনের সীমা আগের মতোই থাকছে।"),
    (Neutral, "{place_bn} শহরে ডিজিটাল লেনদেন নিয়ে সেমিনার হয়েছে।"),
    (Positive, "{mfs_bn} সেরা গ্রাহকসেবার পুরস্কার পেয়েছে।"),
    (Positive, "দ্রুত ও নিরাপদ সেবায় গ্রাহকরা খুশি।"),
    (Positive, "{place_bn} অঞ্চলের কৃষকেরা নতুন সঞ্চয় সুবিধাকে স্বাগত জানিয়েছেন।"),
    (Positive, "বন্যার্তদের কাছে দ্রুত সহায়তা পৌঁছে দিয়েছে {mfs_bn}।"),
];

const MIXED: &[(SentimentLabel, &str)] = &[
    (Negative, "{mfs} এজেন্ট fraud করেছে, police case হয়েছে।"),
    (Negative, "আমার {mfs} account hack করে টাকা নিয়ে গেছে!"),
    (Negative, "Fake agent ফোন করে OTP চেয়েছে, সাবধান!"),
    (Neutral, "{mfs} app update আসবে {day}।"),
    (Neutral, "Agent point কখন খোলে জানতে চাই?"),
    (Neutral, "{place} branch এর ঠিকানা কোথায়?"),
    (Positive, "{mfs} cashback offer টা অনেক ভালো!"),
    (Positive, "Service খুব fast, ধন্যবাদ {mfs}!"),
];

const TITLES: &[&str] = &[
    "Mobile money roundup",
    "Business desk",
    "City news",
    "মোবাইল ব্যাংকিং সংবাদ",
    "অর্থনীতি",
    "Digital payments update",
];

fn bangla_digits(n: u64) -> String {
    n.to_string().chars().map(|c| DIGITS_BN[c.to_digit(10).unwrap() as usize]).collect()
}

fn fill(template: &str, rng: &mut ChaCha8Rng) -> String {
    let amount = rng.random_range(5..500) * 1000;
    let count = rng.random_range(3..40);
    template
        .replace("{mfs}", MFS.choose(rng).unwrap())
        .replace("{mfs_bn}", MFS_BN.choose(rng).unwrap())
        .replace("{place}", PLACES.choose(rng).unwrap())
        .replace("{place_bn}", PLACES_BN.choose(rng).unwrap())
        .replace("{month}", MONTHS.choose(rng).unwrap())
        .replace("{day}", DAYS.choose(rng).unwrap())
        .replace("{day_bn}", DAYS_BN.choose(rng).unwrap())
        .replace("{crime}", CRIMES.choose(rng).unwrap())
        .replace("{amount}", &amount.to_string())
        .replace("{amount_bn}", &bangla_digits(amount))
        .replace("{count}", &count.to_string())
        .replace("{count_bn}", &bangla_digits(count))
}

fn sentence(label: SentimentLabel, rng: &mut ChaCha8Rng) -> String {
    let pool = match rng.random_range(0..10) {
        0..=3 => EN,
        4..=7 => BN,
        _ => MIXED,
    };
    let candidates: Vec<&str> = pool.iter().filter(|(l, _)| *l == label).map(|(_, t)| *t).collect();
    fill(candidates.choose(rng).unwrap(), rng)
}

fn main() {
    let out = std::env::args().nth(1).unwrap_or_else(|| "data/synthetic_corpus.jsonl".to_string());
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);

    let mut labels: Vec<SentimentLabel> = QUOTA.iter().flat_map(|&(l, n)| std::iter::repeat_n(l, n)).collect();
    labels.shuffle(&mut rng);

    let base: DateTime<Utc> = "2026-01-05T06:00:00Z".parse().unwrap();
    let mut documents = Vec::new();
    let mut fragments = Vec::new();
    let mut rest = labels.as_slice();
    let mut n = 0;
    while !rest.is_empty() {
        n += 1;
        let take = rng.random_range(1..=4).min(rest.len());
        let (chunk, tail) = rest.split_at(take);
        rest = tail;
        let sentences: Vec<String> = chunk.iter().map(|&l| sentence(l, &mut rng)).collect();

        let news = rng.random_bool(0.6);
        let mut doc = if news {
            let mut html: String = sentences.iter().map(|s| format!("<p>{s}</p>")).collect();
            if rng.random_bool(0.3) {
                html.push_str("<figure><img src=\"photo.jpg\" alt=\"photo\"><figcaption>Photo: staff</figcaption></figure>");
            }
            let mut d = Document::new(
                format!("syn-news-{n:04}"),
                DocumentSource::NewsFeed,
                format!("https://news.example.org/syn/{n:04}"),
                html,
            );
            d.title = Some(TITLES.choose(&mut rng).unwrap().to_string());
            d
        } else {
            Document::new(
                format!("syn-social-{n:04}"),
                DocumentSource::SocialExport,
                format!("synthetic-export.jsonl#{n:04}"),
                sentences.join(" "),
            )
        };
        doc.fetched_at = base + Duration::minutes(n as i64 * 7);
        let doc = clean_document(&doc).expect("generated text is never empty");
        let mut frags: Vec<Fragment> = segment_fragments(&doc);
        assert_eq!(frags.len(), chunk.len(), "segmentation drifted for {}: {:?}", doc.id, doc.cleaned_text);
        for (f, &label) in frags.iter_mut().zip(chunk) {
            f.label = Some(label);
        }
        documents.push(doc);
        fragments.extend(frags);
    }

    save_corpus(&documents, &fragments, std::path::Path::new(&out)).expect("write corpus");
    eprintln!("wrote {} documents and {} fragments to {out}", documents.len(), fragments.len());
}
