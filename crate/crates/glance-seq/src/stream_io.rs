//! Event-stream files and the streaming prediction record format.
//!
//! A stream file is the glance row format without the epoch id: header
//! `t_ms,region`, one timestamped region per row. Each sliding-window
//! emission is rendered as one comma-separated line:
//! `emission_time_ms,problem_name,chosen_class_name_or_abstain,loglik_1,loglik_2,margin`.

use std::io::BufRead;

use glance_seq_core::{BinaryClassifier, ChosenClass, GlanceEvent, GlanceRegion, WindowEmission};

use crate::dataset::IngestError;

/// Parse a stream file; `name` labels the source in errors.
pub fn read_events(reader: impl BufRead, name: &str) -> Result<Vec<GlanceEvent>, IngestError> {
    let parse_err = |line: usize, message: String| IngestError::Parse {
        file: name.to_owned(),
        line,
        message,
    };
    let mut lines = reader.lines().enumerate();
    match lines.next() {
        Some((_, Ok(header))) if header.trim_end_matches('\r') == "t_ms,region" => {}
        Some((_, Ok(header))) => {
            return Err(parse_err(1, format!("bad header {header:?}, expected `t_ms,region`")))
        }
        Some((_, Err(source))) => {
            return Err(IngestError::Io { path: name.to_owned(), source })
        }
        None => return Err(parse_err(1, "missing header `t_ms,region`".into())),
    }
    let mut events = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        let line = line.map_err(|source| IngestError::Io { path: name.to_owned(), source })?;
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let Some((t_ms, region)) = line.split_once(',') else {
            return Err(parse_err(line_no, format!("expected 2 fields, got {line:?}")));
        };
        let t_ms: u64 = t_ms
            .parse()
            .map_err(|_| parse_err(line_no, format!("bad t_ms {t_ms:?}")))?;
        let region = GlanceRegion::from_name(region)
            .ok_or_else(|| parse_err(line_no, format!("unknown region {region:?}")))?;
        events.push(GlanceEvent::new(region, t_ms));
    }
    Ok(events)
}

/// Render one emission as its line-delimited record.
pub fn format_emission(classifier: &BinaryClassifier, emission: &WindowEmission) -> String {
    let p = &emission.prediction;
    let label = if emission.abstain {
        "abstain"
    } else {
        match p.chosen_class {
            ChosenClass::Class1 => &classifier.class_names.0,
            ChosenClass::Class2 => &classifier.class_names.1,
        }
    };
    format!(
        "{},{},{label},{:.6},{:.6},{:.6}",
        emission.time_ms, classifier.problem_name, p.loglik_1, p.loglik_2, p.margin
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use glance_seq_core::{DiscreteHmm, Prediction, TrainConfig};
    use std::io::Cursor;

    #[test]
    fn stream_files_parse() {
        let events = read_events(
            Cursor::new("t_ms,region\n0,forward\n1500,left\n".to_owned()),
            "events.csv",
        )
        .expect("parses");
        assert_eq!(events.len(), 2);
        assert_eq!(events[1].t_ms, 1500);
        assert_eq!(events[1].region, GlanceRegion::Left);

        for bad in ["wrong,header\n", "t_ms,region\nabc,forward\n", "t_ms,region\n0,sky\n"] {
            assert!(read_events(Cursor::new(bad.to_owned()), "events.csv").is_err(), "{bad:?}");
        }
    }

    #[test]
    fn emission_records_are_csv_lines() {
        let model = DiscreteHmm::new(vec![1.0], vec![1.0], {
            let mut b = vec![0.0; 8];
            b[GlanceRegion::Forward.index()] = 1.0;
            b
        })
        .expect("valid");
        let clf = BinaryClassifier {
            problem_name: "distraction (not_distracted vs adjusting_radio)".into(),
            class_names: ("not_distracted".into(), "adjusting_radio".into()),
            model_1: model.clone(),
            model_2: model,
            train_config: TrainConfig::default(),
        };
        let emission = WindowEmission {
            time_ms: 6250,
            prediction: Prediction {
                chosen_class: ChosenClass::Class2,
                loglik_1: -31.25,
                loglik_2: -28.5,
                margin: 2.75,
            },
            abstain: false,
        };
        assert_eq!(
            format_emission(&clf, &emission),
            "6250,distraction (not_distracted vs adjusting_radio),adjusting_radio,-31.250000,-28.500000,2.750000"
        );
        let abstained = WindowEmission { abstain: true, ..emission };
        assert!(format_emission(&clf, &abstained).contains(",abstain,"));
    }
}
