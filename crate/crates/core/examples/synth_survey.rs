//! Writes a synthetic survey CSV with the column layout and value
//! vocabulary of the 2014 OSMI "Mental Health in Tech" survey.
//!
//! Answers are drawn independently given the `treatment` answer, using
//! approximate class-conditional frequencies of the public survey. The file
//! stands in for the real `survey.csv` when that is not available; the
//! default experiment config reads either.
//!
//! ```text
//! cargo run -p qksvm --example synth_survey -- data/osmi_survey_synthetic.csv
//! ```

use std::error::Error;

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const ROWS: usize = 1259;
const SEED: u64 = 2014;

/// Categorical answer with weights for treated / untreated respondents.
struct Question {
    column: &'static str,
    answers: &'static [&'static str],
    treated: &'static [f64],
    untreated: &'static [f64],
}

const QUESTIONS: &[Question] = &[
    Question {
        column: "self_employed",
        answers: &["No", "Yes", "NA"],
        treated: &[0.87, 0.12, 0.01],
        untreated: &[0.88, 0.11, 0.01],
    },
    Question {
        column: "family_history",
        answers: &["No", "Yes"],
        treated: &[0.43, 0.57],
        untreated: &[0.79, 0.21],
    },
    Question {
        column: "work_interfere",
        answers: &["Never", "Rarely", "Sometimes", "Often", "NA"],
        treated: &[0.03, 0.19, 0.56, 0.19, 0.03],
        untreated: &[0.31, 0.08, 0.17, 0.05, 0.39],
    },
    Question {
        column: "no_employees",
        answers: &["1-5", "6-25", "26-100", "100-500", "500-1000", "More than 1000"],
        treated: &[0.13, 0.22, 0.23, 0.14, 0.05, 0.23],
        untreated: &[0.11, 0.24, 0.22, 0.14, 0.05, 0.24],
    },
    Question {
        column: "remote_work",
        answers: &["No", "Yes"],
        treated: &[0.68, 0.32],
        untreated: &[0.72, 0.28],
    },
    Question {
        column: "tech_company",
        answers: &["Yes", "No"],
        treated: &[0.80, 0.20],
        untreated: &[0.84, 0.16],
    },
    Question {
        column: "benefits",
        answers: &["Yes", "No", "Don't know"],
        treated: &[0.44, 0.27, 0.29],
        untreated: &[0.30, 0.29, 0.41],
    },
    Question {
        column: "care_options",
        answers: &["Yes", "No", "Not sure"],
        treated: &[0.46, 0.27, 0.27],
        untreated: &[0.24, 0.52, 0.24],
    },
    Question {
        column: "wellness_program",
        answers: &["No", "Yes", "Don't know"],
        treated: &[0.66, 0.20, 0.14],
        untreated: &[0.68, 0.16, 0.16],
    },
    Question {
        column: "seek_help",
        answers: &["No", "Yes", "Don't know"],
        treated: &[0.50, 0.22, 0.28],
        untreated: &[0.52, 0.18, 0.30],
    },
    Question {
        column: "anonymity",
        answers: &["Yes", "No", "Don't know"],
        treated: &[0.35, 0.06, 0.59],
        untreated: &[0.24, 0.05, 0.71],
    },
    Question {
        column: "leave",
        answers: &["Very easy", "Somewhat easy", "Don't know", "Somewhat difficult", "Very difficult"],
        treated: &[0.16, 0.21, 0.40, 0.11, 0.12],
        untreated: &[0.16, 0.22, 0.49, 0.09, 0.04],
    },
    Question {
        column: "mental_health_consequence",
        answers: &["No", "Maybe", "Yes"],
        treated: &[0.36, 0.38, 0.26],
        untreated: &[0.43, 0.38, 0.19],
    },
    Question {
        column: "phys_health_consequence",
        answers: &["No", "Maybe", "Yes"],
        treated: &[0.72, 0.22, 0.06],
        untreated: &[0.75, 0.21, 0.04],
    },
    Question {
        column: "coworkers",
        answers: &["No", "Some of them", "Yes"],
        treated: &[0.19, 0.62, 0.19],
        untreated: &[0.23, 0.61, 0.16],
    },
    Question {
        column: "supervisor",
        answers: &["No", "Some of them", "Yes"],
        treated: &[0.31, 0.28, 0.41],
        untreated: &[0.30, 0.27, 0.43],
    },
    Question {
        column: "mental_health_interview",
        answers: &["No", "Maybe", "Yes"],
        treated: &[0.78, 0.19, 0.03],
        untreated: &[0.81, 0.16, 0.03],
    },
    Question {
        column: "phys_health_interview",
        answers: &["No", "Maybe", "Yes"],
        treated: &[0.39, 0.45, 0.16],
        untreated: &[0.41, 0.44, 0.15],
    },
    Question {
        column: "mental_vs_physical",
        answers: &["Don't know", "Yes", "No"],
        treated: &[0.42, 0.29, 0.29],
        untreated: &[0.50, 0.25, 0.25],
    },
    Question {
        column: "obs_consequence",
        answers: &["No", "Yes"],
        treated: &[0.80, 0.20],
        untreated: &[0.91, 0.09],
    },
];

const COUNTRIES: &[(&str, f64)] = &[
    ("United States", 0.60),
    ("United Kingdom", 0.15),
    ("Canada", 0.06),
    ("Germany", 0.04),
    ("Netherlands", 0.02),
    ("Ireland", 0.02),
    ("Australia", 0.02),
    ("France", 0.01),
    ("India", 0.01),
    ("New Zealand", 0.01),
    ("Other", 0.06),
];

const US_STATES: &[&str] = &["CA", "WA", "NY", "TX", "TN", "IL", "OH", "OR", "PA", "IN"];

/// Free-text spellings as they appear in the raw survey.
const MALE: &[&str] = &["Male", "male", "M", "m", "Man", "Male "];
const FEMALE: &[&str] = &["Female", "female", "F", "f", "Woman"];
const OTHER: &[&str] = &["Non-binary", "queer", "Genderqueer", "Agender"];

const COMMENTS: &[&str] = &[
    "My company is great about this, but my team lead is not.",
    "I'm not sure; it \"depends\" on the manager.",
    "HR never answered, so I stopped asking",
    "Small startup, no formal policy",
];

fn pick<'a, R: Rng>(rng: &mut R, items: &'a [&'a str]) -> &'a str {
    items[rng.gen_range(0..items.len())]
}

fn main() -> Result<(), Box<dyn Error>> {
    let out = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "data/osmi_survey_synthetic.csv".into());
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut w = csv::Writer::from_path(&out)?;

    let mut header = vec!["Timestamp", "Age", "Gender", "Country", "state"];
    header.extend(QUESTIONS.iter().take(2).map(|q| q.column));
    header.push("treatment");
    header.extend(QUESTIONS.iter().skip(2).map(|q| q.column));
    header.push("comments");
    w.write_record(&header)?;

    let country_w = WeightedIndex::new(COUNTRIES.iter().map(|c| c.1))?;
    for i in 0..ROWS {
        let treated = rng.gen_bool(0.506);
        let minutes = 44 * 60 + 5 * i;
        let timestamp = format!(
            "2014-08-{:02} {:02}:{:02}:{:02}",
            27 + minutes / (24 * 60) % 4,
            minutes / 60 % 24,
            minutes % 60,
            (i * 7) % 60
        );
        let age_noise: f64 = (0..4).map(|_| rng.gen::<f64>()).sum::<f64>() - 2.0;
        let age = (32.0 + if treated { 1.0 } else { 0.0 } + 12.0 * age_noise)
            .round()
            .clamp(18.0, 72.0);
        let gender = match rng.gen::<f64>() {
            g if g < if treated { 0.26 } else { 0.12 } => pick(&mut rng, FEMALE),
            g if g > 0.985 => pick(&mut rng, OTHER),
            _ => pick(&mut rng, MALE),
        };
        let country = COUNTRIES[country_w.sample(&mut rng)].0;
        let state = if country == "United States" {
            pick(&mut rng, US_STATES)
        } else {
            "NA"
        };

        let answers: Vec<&str> = QUESTIONS
            .iter()
            .map(|q| {
                let weights = if treated { q.treated } else { q.untreated };
                let dist = WeightedIndex::new(weights).expect("positive weights");
                q.answers[dist.sample(&mut rng)]
            })
            .collect();
        let comment = if rng.gen_bool(0.12) {
            pick(&mut rng, COMMENTS)
        } else {
            "NA"
        };

        let age = age.to_string();
        let mut rec = vec![timestamp.as_str(), age.as_str(), gender, country, state];
        rec.extend(&answers[..2]);
        rec.push(if treated { "Yes" } else { "No" });
        rec.extend(&answers[2..]);
        rec.push(comment);
        w.write_record(&rec)?;
    }
    w.flush()?;
    eprintln!("wrote {ROWS} rows to {out}");
    Ok(())
}
