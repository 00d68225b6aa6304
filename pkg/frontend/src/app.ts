/**
 * Application wiring: the diagnose form, the records browser, and the
 * transitions between them. One diagnose request may be in flight at a
 * time; the submit button stays disabled until the response lands.
 */

import { ApiError, fetchRecord, fetchRecords, submitDiagnosis } from "./api.js";
import {
  renderErrorBanner,
  renderRecordsTable,
  renderResultView,
} from "./render.js";
import { validateForm } from "./state.js";
import type { DiagnosisRecord, SubmitState } from "./types.js";

export class App {
  private submitState: SubmitState = "idle";

  private form: HTMLFormElement;
  private nameInput: HTMLInputElement;
  private yearInput: HTMLInputElement;
  private fileInput: HTMLInputElement;
  private submitButton: HTMLButtonElement;
  private resultContainer: HTMLElement;
  private recordsContainer: HTMLElement;
  private bannerContainer: HTMLElement;
  private refreshButton: HTMLButtonElement;

  constructor(private root: Document = document) {
    this.form = this.require<HTMLFormElement>("#diagnose-form");
    this.nameInput = this.require<HTMLInputElement>("#patient-name");
    this.yearInput = this.require<HTMLInputElement>("#birth-year");
    this.fileInput = this.require<HTMLInputElement>("#image-file");
    this.submitButton = this.require<HTMLButtonElement>("#submit-diagnosis");
    this.resultContainer = this.require<HTMLElement>("#result");
    this.recordsContainer = this.require<HTMLElement>("#records");
    this.bannerContainer = this.require<HTMLElement>("#banners");
    this.refreshButton = this.require<HTMLButtonElement>("#refresh-records");
  }

  private require<T extends Element>(selector: string): T {
    const node = this.root.querySelector(selector);
    if (!node) {
      throw new Error(`missing required element ${selector}`);
    }
    return node as T;
  }

  start(): void {
    this.form.addEventListener("submit", (event) => {
      event.preventDefault();
      void this.onSubmit();
    });
    for (const input of [this.nameInput, this.yearInput, this.fileInput]) {
      input.addEventListener("input", () => this.refreshValidity());
    }
    this.refreshButton.addEventListener("click", () => void this.loadRecords());
    this.refreshValidity();
    void this.loadRecords();
  }

  get state(): SubmitState {
    return this.submitState;
  }

  private formValues() {
    return {
      patientName: this.nameInput.value,
      birthYear: this.yearInput.value,
      imageFile: this.fileInput.files?.[0] ?? null,
    };
  }

  /** Submit stays disabled until all three fields validate. */
  refreshValidity(): void {
    const { valid, errors } = validateForm(this.formValues());
    this.submitButton.disabled = !valid || this.submitState === "pending";
    this.setFieldError("#patient-name-error", errors.patientName);
    this.setFieldError("#birth-year-error", errors.birthYear);
    this.setFieldError("#image-file-error", errors.imageFile);
  }

  private setFieldError(selector: string, message: string | undefined): void {
    const node = this.root.querySelector(selector);
    if (node) {
      node.textContent = message ?? "";
    }
  }

  async onSubmit(): Promise<void> {
    const values = this.formValues();
    const { valid } = validateForm(values);
    if (!valid || this.submitState === "pending" || values.imageFile === null) {
      this.refreshValidity();   // inline messages, no request
      return;
    }
    this.submitState = "pending";
    this.refreshValidity();
    try {
      const record = await submitDiagnosis(
        values.patientName,
        values.birthYear,
        values.imageFile,
      );
      this.submitState = "done";
      this.showResult(record);
      await this.loadRecords();
    } catch (error) {
      // the form keeps its values so the clinician can correct and retry
      this.submitState = "error";
      this.showError(
        error instanceof ApiError
          ? `Diagnosis failed (${error.code}): ${error.message}`
          : `Diagnosis failed: could not reach the service.`,
      );
    } finally {
      if (this.submitState === "pending") {
        this.submitState = "idle";
      }
      this.refreshValidity();
    }
  }

  showResult(record: DiagnosisRecord): void {
    this.resultContainer.replaceChildren(renderResultView(record));
  }

  showError(message: string): void {
    this.bannerContainer.replaceChildren(
      renderErrorBanner(message, () => undefined),
    );
  }

  async loadRecords(): Promise<void> {
    try {
      const records = await fetchRecords();
      this.recordsContainer.replaceChildren(
        renderRecordsTable(records, (record) => void this.openRecord(record)),
      );
    } catch (error) {
      this.recordsContainer.replaceChildren();
      this.showError(
        error instanceof ApiError
          ? `Could not load records (${error.code}): ${error.message}`
          : "Could not load records: service unreachable.",
      );
    }
  }

  async openRecord(record: DiagnosisRecord): Promise<void> {
    try {
      this.showResult(await fetchRecord(record.record_id));
    } catch {
      this.showResult(record);   // fall back to the listed copy
    }
  }
}

export function bootstrap(): void {
  const app = new App(document);
  app.start();
}
