use std::sync::Arc;
use std::time::Instant;

use super::config::{ConfigError, PipelineConfig};
use super::job::{JobError, JobMode, Timings};
use crate::baseline::{extract_baseline_preview, AdCueDetector, BaselinePreview, LexiconScorer};
use crate::gate::{filter_metadata, StopwordDetector};
use crate::llm::{
    complete_guarded, parse_llm_output, ClientError, CompletionClient, CompletionRequest, GatedClient, HttpClient,
};
use crate::promptkit::PromptKit;
use crate::selector::{select_llm_preview, PreviewRecord};
use crate::transcript::{Episode, Sentencizer};

/// Records produced for one episode.
#[derive(Debug, Clone, PartialEq)]
pub struct Extraction {
    pub records: Vec<PreviewRecord>,
    pub timings: Timings,
}

/// Everything needed to turn an episode into preview records. Shared by the
/// CLI, the batch worker and the HTTP service.
pub struct Engine {
    config: PipelineConfig,
    prompts: PromptKit,
    client: Option<Arc<dyn CompletionClient>>,
    sentencizer: Sentencizer,
    ads: AdCueDetector,
    lexicon: LexiconScorer,
    detector: StopwordDetector,
}

impl Engine {
    /// `client` is wrapped in an admission gate of `client.max_in_flight`.
    /// Without a client, llm jobs fail and baseline jobs still run.
    pub fn new(config: PipelineConfig, client: Option<Arc<dyn CompletionClient>>) -> Result<Self, ConfigError> {
        config.validate()?;
        let prompts = PromptKit::new(config.prompt.clone()).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        let ads = AdCueDetector::new(&config.ad_cues.cues, config.ad_cues.confidence).map_err(ConfigError::Invalid)?;
        let cap = config.client.max_in_flight;
        let client = client.map(|c| Arc::new(GatedClient::new(c, cap)) as Arc<dyn CompletionClient>);
        Ok(Self {
            lexicon: config.lexicon.clone(),
            config,
            prompts,
            client,
            sentencizer: Sentencizer::default(),
            ads,
            detector: StopwordDetector,
        })
    }

    /// Engine backed by the configured HTTP endpoint.
    pub fn with_http(config: PipelineConfig) -> Result<Self, ConfigError> {
        let http = HttpClient::new(config.client.http.clone())
            .map_err(|e: ClientError| ConfigError::Invalid(e.to_string()))?;
        Self::new(config, Some(Arc::new(http)))
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    pub fn extract(&self, episode: &Episode, mode: JobMode) -> Result<Extraction, JobError> {
        match mode {
            JobMode::Llm => self.extract_llm(episode),
            JobMode::Baseline => self.extract_baseline(episode).map(|(ex, _)| ex),
            JobMode::Both => {
                let started = Instant::now();
                let llm = self.extract_llm(episode)?;
                let (base, _) = self.extract_baseline(episode)?;
                Ok(Extraction {
                    records: llm.records.into_iter().chain(base.records).collect(),
                    timings: Timings {
                        total_s: started.elapsed().as_secs_f64(),
                        llm_call_s: llm.timings.llm_call_s,
                        parse_s: llm.timings.parse_s,
                    },
                })
            }
        }
    }

    /// Metadata gate, prompt, completion, parse, snap and trim.
    pub fn extract_llm(&self, episode: &Episode) -> Result<Extraction, JobError> {
        let started = Instant::now();
        let decision = filter_metadata(episode);
        if !decision.eligible {
            return Err(JobError::IneligibleLanguage(format!("language tags {:?}", episode.language_tags)));
        }
        let transcript = episode.transcript(&self.sentencizer).map_err(|e| JobError::Transcript(e.to_string()))?;
        let bundle = self.prompts.build(episode, &transcript).map_err(|e| JobError::Prompt(e.to_string()))?;
        let client = self.client.as_ref().ok_or_else(|| JobError::Llm("no completion client configured".into()))?;

        let mut req = CompletionRequest::new(bundle.system_prompt, bundle.user_prompt);
        req.temperature = self.config.client.temperature;
        req.max_output_tokens = self.config.client.max_output_tokens;
        let call_started = Instant::now();
        let result = complete_guarded(client.as_ref(), &req, &self.config.client.retry, &self.config.client.budget)
            .map_err(|e| JobError::Llm(e.to_string()))?;
        let llm_call_s = call_started.elapsed().as_secs_f64();

        let parse_started = Instant::now();
        let choice = parse_llm_output(&result.text).map_err(|e| JobError::Parse(e.to_string()))?;
        let selection = select_llm_preview(&transcript, &choice, &self.config.selector)
            .map_err(|e| JobError::Select(e.to_string()))?;
        let record = PreviewRecord::from_llm(&selection);
        let parse_s = parse_started.elapsed().as_secs_f64();

        Ok(Extraction {
            records: vec![record],
            timings: Timings { total_s: started.elapsed().as_secs_f64(), llm_call_s, parse_s },
        })
    }

    /// Combined language gate, then the signal-fusion baseline.
    pub fn extract_baseline(&self, episode: &Episode) -> Result<(Extraction, BaselinePreview), JobError> {
        let started = Instant::now();
        let decision = self
            .config
            .gate
            .filter_combined(episode, &self.detector)
            .map_err(|e| JobError::IneligibleLanguage(e.to_string()))?;
        if !decision.eligible {
            return Err(JobError::IneligibleLanguage(format!("language tags {:?}", episode.language_tags)));
        }
        let transcript = episode.transcript(&self.sentencizer).map_err(|e| JobError::Transcript(e.to_string()))?;
        let preview =
            extract_baseline_preview(episode, &transcript, &[&self.lexicon], &[&self.ads], &self.config.baseline)
                .map_err(|e| JobError::Baseline(e.to_string()))?;
        let mut record = PreviewRecord::new(&preview.span, None);
        record.degenerate = preview.degenerate;
        let extraction = Extraction {
            records: vec![record],
            timings: Timings { total_s: started.elapsed().as_secs_f64(), llm_call_s: 0.0, parse_s: 0.0 },
        };
        Ok((extraction, preview))
    }
}
